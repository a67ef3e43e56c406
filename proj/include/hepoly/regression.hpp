/**
 * @file regression.hpp
 * @brief Polynomial regression trained on ciphertexts.
 *
 * The training server expands each encrypted row into monomial features,
 * accumulates the Gram matrix A = Phi^T Phi and moment vector b = Phi^T y
 * with homomorphic sums and products, and hands only those p^2 + p
 * aggregate ciphertexts to the key holder. The normal equations are then
 * solved in plaintext. No individual sample ever crosses the decryption
 * boundary.
 *
 * @license Apache-2.0
 */

#ifndef HEPOLY_REGRESSION_HPP
#define HEPOLY_REGRESSION_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hepoly/ckks.hpp"
#include "hepoly/data.hpp"

namespace hepoly::regression {

/// Per-feature monomial expansion x, x^2, ..., x^degree (no cross terms),
/// optionally preceded by an intercept.
struct FeatureMapSpec {
    std::size_t degree = 1;
    bool include_intercept = true;
};

/// Expanded feature count for a given input dimension.
std::size_t expanded_size(const FeatureMapSpec& spec, std::size_t input_dim);

enum class FitMode { enc, plain };

struct RegressionModel {
    std::vector<double> theta;
    FeatureMapSpec spec;
    data::ScalerParams scaler;
    FitMode fit_mode = FitMode::plain;
    bool used_ridge = false;  // set when the solver fell back to A + lambda*I
};

/// Decryption boundary for the aggregate sums; implemented by the trusted
/// party (and by counting stubs in tests).
class AggregateDecryptor {
public:
    virtual ~AggregateDecryptor() = default;
    virtual double decrypt_aggregate(const ckks::Ciphertext& ct) = 0;
};

/// The encrypted normal system A theta = b. A is symmetric by construction:
/// each (k, l) pair with k <= l is accumulated once and mirrored.
struct NormalSystem {
    std::vector<std::vector<ckks::Ciphertext>> a;  // p x p
    std::vector<ckks::Ciphertext> b;               // p
};

/// Plaintext expansion mirroring the encrypted one: [1,] x, x^2, ...,
/// per feature in order.
std::vector<double> expand_features(std::span<const double> row,
                                    const FeatureMapSpec& spec);

/// Encrypted expansion. Powers above 1 are built by repeated mul_ct; the
/// intercept slot reuses one E(1) encrypted for the whole fit.
std::vector<ckks::Ciphertext> expand_features_enc(std::span<const ckks::Ciphertext> row,
                                                  const FeatureMapSpec& spec,
                                                  const ckks::Ciphertext& encrypted_one);

/// A[k][l] = sum_i phi_k(i) * phi_l(i), b[k] = sum_i phi_k(i) * y_i, all
/// under encryption.
NormalSystem accumulate_normal_system(
    std::span<const std::vector<ckks::Ciphertext>> expansions,
    std::span<const ckks::Ciphertext> targets);

/// Symmetric solve with partial pivoting. Near-singular systems fall back
/// to ridge (A + lambda*I, lambda = 1e-8 * trace(A) / p); *used_ridge is set
/// when the fallback fired.
std::vector<double> solve_system(const std::vector<std::vector<double>>& a,
                                 std::span<const double> b,
                                 bool* used_ridge = nullptr);

/// Plaintext fit via the same Gram accumulation and solver.
RegressionModel fit_plain(const data::Dataset& scaled, const FeatureMapSpec& spec,
                          const data::ScalerParams& scaler);

/// Encrypted fit: expand, accumulate, decrypt exactly p^2 + p aggregates
/// through the decryptor, solve in plaintext.
RegressionModel fit_encrypted(const data::EncryptedDataset& eds,
                              const FeatureMapSpec& spec,
                              const data::ScalerParams& scaler,
                              const ckks::Ciphertext& encrypted_one,
                              AggregateDecryptor& aggregates);

double predict_plain(const RegressionModel& model, std::span<const double> x_scaled);

/// Encrypted prediction with plaintext weights: expansion under encryption,
/// then mul_const/add folds. The result stays encrypted.
ckks::Ciphertext predict_encrypted(const RegressionModel& model,
                                   std::span<const ckks::Ciphertext> x_row,
                                   const ckks::Ciphertext& encrypted_one);

void save_model(const RegressionModel& model, const std::filesystem::path& path);
RegressionModel load_model(const std::filesystem::path& path);

}  // namespace hepoly::regression

#endif  // HEPOLY_REGRESSION_HPP
