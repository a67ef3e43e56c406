/**
 * @file mlp.hpp
 * @brief One-hidden-layer perceptron: plaintext training, encrypted inference.
 *
 * Training runs on plaintext with full-batch gradient descent on the MSE;
 * loss and gradient evaluation are not expressible under the supported
 * ciphertext operations. Encrypted inference applies the learned plaintext
 * weights to encrypted inputs with the identity activation, since ReLU is
 * not polynomial. That mismatch (ReLU trained, identity inferred) is
 * deliberate; an identity training mode exists for exact-equivalence tests.
 *
 * @license Apache-2.0
 */

#ifndef HEPOLY_MLP_HPP
#define HEPOLY_MLP_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hepoly/ckks.hpp"
#include "hepoly/data.hpp"

namespace hepoly::mlp {

enum class Activation { relu, identity };

struct MlpParams {
    std::vector<std::vector<double>> w1;  // h x d
    std::vector<double> b1;               // h
    std::vector<double> w2;               // h (single output row)
    double b2 = 0.0;

    std::size_t hidden_units() const { return w1.size(); }
    std::size_t input_dim() const { return w1.empty() ? 0 : w1.front().size(); }
};

struct TrainConfig {
    std::size_t hidden_units = 16;
    double learning_rate = 0.02;
    std::size_t epochs = 500;
    std::uint64_t seed = 0;
    Activation train_activation = Activation::relu;

    void validate() const;
};

/// Glorot-uniform weights, zero biases, reproducible per seed.
MlpParams init_params(std::size_t input_dim, const TrainConfig& config);

double forward_plain(const MlpParams& params, std::span<const double> x,
                     Activation activation);

/// Mean squared error over the dataset.
double mse_loss(const MlpParams& params, const data::Dataset& scaled,
                Activation activation);

/// Analytic full-batch MSE gradients (same shapes as the params).
struct Gradients {
    std::vector<std::vector<double>> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;
};
Gradients mse_gradients(const MlpParams& params, const data::Dataset& scaled,
                        Activation activation);

struct TrainResult {
    MlpParams params;
    std::vector<double> loss_history;  // initial loss plus one entry per epoch
};

/// Full-batch gradient descent. Throws (naming the epoch) if the loss
/// diverges to a non-finite value.
TrainResult train_plain(const data::Dataset& scaled, const TrainConfig& config);

/// Identity-activation forward pass over encrypted inputs and plaintext
/// weights: constant multiplications and additions only, so the output
/// level stays 0.
ckks::Ciphertext forward_encrypted(const MlpParams& params,
                                   std::span<const ckks::Ciphertext> x_cts);

void save_params(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_params(const std::filesystem::path& path);

}  // namespace hepoly::mlp

#endif  // HEPOLY_MLP_HPP
