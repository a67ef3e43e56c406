/**
 * @file knn.cpp
 * @license Apache-2.0
 */

#include "hepoly/knn.hpp"

#include <limits>
#include <stdexcept>

#include "hepoly/ops.hpp"

namespace hepoly::knn {

namespace {

void check_k(std::size_t k, std::size_t n) {
    if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
    if (k > n) throw std::invalid_argument("knn: k exceeds the number of stored samples");
}

}  // namespace

KnnModel fit_plain(const data::Dataset& scaled, std::size_t k) {
    check_k(k, scaled.rows());
    KnnModel model;
    model.k = k;
    model.encrypted = false;
    model.plain_features = scaled.features;
    model.plain_targets = scaled.target;
    return model;
}

KnnModel fit_encrypted(data::EncryptedDataset eds, std::size_t k) {
    check_k(k, eds.rows());
    KnnModel model;
    model.k = k;
    model.encrypted = true;
    model.enc_data = std::move(eds);
    return model;
}

ckks::Ciphertext sq_distance_enc(std::span<const ckks::Ciphertext> a,
                                 std::span<const ckks::Ciphertext> b) {
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("sq_distance_enc: dimension mismatch");
    ckks::Ciphertext acc;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const ckks::Ciphertext diff = ops::sub(a[j], b[j]);
        const ckks::Ciphertext sq = ops::mul_ct(diff, diff);
        acc = (j == 0) ? sq : ops::add(acc, sq);
    }
    return acc;
}

double sq_distance_plain(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("sq_distance_plain: dimension mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
    return acc;
}

std::vector<std::size_t> k_smallest_indices(std::span<const double> values, std::size_t k,
                                            double tie_eps) {
    check_k(k, values.size());
    std::vector<bool> taken(values.size(), false);
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t round = 0; round < k; ++round) {
        double min_value = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!taken[i] && values[i] < min_value) min_value = values[i];
        std::size_t best = values.size();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!taken[i] && values[i] <= min_value + tie_eps) {
                best = i;
                break;
            }
        }
        taken[best] = true;
        out.push_back(best);
    }
    return out;
}

std::vector<std::size_t> k_nearest(std::span<const ckks::Ciphertext> distances,
                                   std::size_t k, OrderingOracle& oracle) {
    check_k(k, distances.size());
    return oracle.smallest_k(distances, k);
}

ckks::Ciphertext predict_encrypted(const KnnModel& model,
                                   std::span<const ckks::Ciphertext> x,
                                   OrderingOracle& oracle) {
    if (!model.encrypted)
        throw std::invalid_argument("knn: encrypted query against a plaintext model");
    if (x.size() != model.enc_data.cols())
        throw std::invalid_argument("knn: query dimension mismatch");
    std::vector<ckks::Ciphertext> distances;
    distances.reserve(model.enc_data.rows());
    for (const auto& row : model.enc_data.features)
        distances.push_back(sq_distance_enc(row, x));
    const std::vector<std::size_t> nearest = k_nearest(distances, model.k, oracle);
    std::vector<ckks::Ciphertext> selected;
    selected.reserve(nearest.size());
    for (std::size_t i : nearest) selected.push_back(model.enc_data.target[i]);
    return ops::mul_const(ops::sum_many(selected), 1.0 / static_cast<double>(model.k));
}

double predict_plain(const KnnModel& model, std::span<const double> x) {
    if (model.encrypted)
        throw std::invalid_argument("knn: plaintext query against an encrypted model");
    if (model.plain_features.empty() || x.size() != model.plain_features.front().size())
        throw std::invalid_argument("knn: query dimension mismatch");
    std::vector<double> distances;
    distances.reserve(model.plain_features.size());
    for (const auto& row : model.plain_features)
        distances.push_back(sq_distance_plain(row, x));
    const std::vector<std::size_t> nearest = k_smallest_indices(distances, model.k);
    double acc = 0.0;
    for (std::size_t i : nearest) acc += model.plain_targets[i];
    return acc / static_cast<double>(model.k);
}

}  // namespace hepoly::knn
