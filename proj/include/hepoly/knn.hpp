/**
 * @file knn.hpp
 * @brief K-nearest-neighbors regression over encrypted distances.
 *
 * Squared distances between encrypted rows are computed homomorphically.
 * Argmin over ciphertexts is not expressible with add/mul alone, so
 * selection goes through an ordering oracle held by the key owner: it sees
 * the encrypted distance list, decrypts internally, and returns only the
 * indices of the k smallest. The relative order of distances is the one
 * deliberate leakage channel of the whole system.
 *
 * @license Apache-2.0
 */

#ifndef HEPOLY_KNN_HPP
#define HEPOLY_KNN_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "hepoly/ckks.hpp"
#include "hepoly/data.hpp"

namespace hepoly::knn {

/// Trusted-party selection service: returns the indices of the k smallest
/// distances, ascending, ties by index. Distance values never leave the
/// implementation.
class OrderingOracle {
public:
    virtual ~OrderingOracle() = default;
    virtual std::vector<std::size_t> smallest_k(std::span<const ckks::Ciphertext> distances,
                                                std::size_t k) = 0;
};

/// Decrypted distances within this of each other count as equal; keeps the
/// encrypted path's float jitter from reordering genuine ties.
inline constexpr double kTieEpsilon = 1e-9;

/// Stored training set, either representation. Features and targets always
/// share one representation; mixing breaks distance comparability.
struct KnnModel {
    std::size_t k = 3;
    bool encrypted = false;
    std::vector<std::vector<double>> plain_features;
    std::vector<double> plain_targets;
    data::EncryptedDataset enc_data;

    std::size_t rows() const {
        return encrypted ? enc_data.rows() : plain_features.size();
    }
};

KnnModel fit_plain(const data::Dataset& scaled, std::size_t k);
KnnModel fit_encrypted(data::EncryptedDataset eds, std::size_t k);

/// sum_j (a_j - b_j)^2 under encryption; one multiplication per coordinate.
ckks::Ciphertext sq_distance_enc(std::span<const ckks::Ciphertext> a,
                                 std::span<const ckks::Ciphertext> b);
double sq_distance_plain(std::span<const double> a, std::span<const double> b);

/// Shared selection rule: k successive argmin scans, each picking the first
/// index within tie_eps of the remaining minimum. Used by both the oracle
/// and the plaintext reference so the two paths agree exactly.
std::vector<std::size_t> k_smallest_indices(std::span<const double> values, std::size_t k,
                                            double tie_eps = kTieEpsilon);

/// Delegates selection to the oracle; only index lists come back.
std::vector<std::size_t> k_nearest(std::span<const ckks::Ciphertext> distances,
                                   std::size_t k, OrderingOracle& oracle);

/// Encrypted query: n encrypted distances, one oracle call, then the mean
/// of the selected encrypted targets. The prediction stays encrypted.
ckks::Ciphertext predict_encrypted(const KnnModel& model,
                                   std::span<const ckks::Ciphertext> x,
                                   OrderingOracle& oracle);
double predict_plain(const KnnModel& model, std::span<const double> x);

}  // namespace hepoly::knn

#endif  // HEPOLY_KNN_HPP
