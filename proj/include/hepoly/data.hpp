/**
 * @file data.hpp
 * @brief Datasets, reversible min-max scaling, splits, and regression metrics.
 * @license Apache-2.0
 */

#ifndef HEPOLY_DATA_HPP
#define HEPOLY_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hepoly/ckks.hpp"

namespace hepoly::data {

struct Dataset {
    std::vector<std::vector<double>> features;  // n rows x d columns
    std::vector<double> target;                 // length n
    std::vector<std::string> feature_names;     // length d
    std::string target_units;

    std::size_t rows() const { return features.size(); }
    std::size_t cols() const { return features.empty() ? 0 : features.front().size(); }
};

/// Per-cell ciphertexts for features and target.
struct EncryptedDataset {
    std::vector<std::vector<ckks::Ciphertext>> features;
    std::vector<ckks::Ciphertext> target;

    std::size_t rows() const { return features.size(); }
    std::size_t cols() const { return features.empty() ? 0 : features.front().size(); }
};

/// Per-column min/max for the affine map to [-1, 1]. Columns with
/// max == min are constant and map to 0.
struct ScalerParams {
    std::vector<double> feature_min;
    std::vector<double> feature_max;
    double target_min = 0.0;
    double target_max = 0.0;
};

struct MetricsReport {
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    bool r2_defined = true;  // false when the target is constant (SS_tot = 0)
    std::string units;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
};

enum class SyntheticKind { linear, nonlinear };

/// One feature x uniform in [-1, 1]; linear targets a*x + b, nonlinear
/// a*x^3 + b*x + c, plus gaussian noise of the given sd. Coefficients and
/// data are drawn from the seed, so the dataset is reproducible.
Dataset generate_synthetic(std::size_t n, SyntheticKind kind, double noise_sd,
                           std::uint64_t seed);

/// Reads a comma-separated file with a header row; every cell must parse as
/// a decimal number. The named target column is extracted, the rest become
/// features in header order. A "MEDV" target is labeled with the housing
/// units (10^3 USD).
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column);

ScalerParams fit_scaler(const Dataset& ds);
Dataset transform(const Dataset& ds, const ScalerParams& sp);
std::vector<double> inverse_transform_target(std::span<const double> values,
                                             const ScalerParams& sp);

/// Seeded shuffle split; test size = round(n * test_fraction), at least 1
/// and at most n-1.
SplitIndices train_test_split(std::size_t n, double test_fraction, std::uint64_t seed);

/// Rows of ds selected by indices, in index order.
Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

/// MAE, RMSE and R^2 = 1 - SS_res/SS_tot. A constant y_true makes R^2
/// undefined; the report flags it rather than reporting 0.
MetricsReport compute_metrics(std::span<const double> y_true,
                              std::span<const double> y_pred, std::string units);

}  // namespace hepoly::data

#endif  // HEPOLY_DATA_HPP
