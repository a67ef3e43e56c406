/**
 * @file data.cpp
 * @license Apache-2.0
 */

#include "hepoly/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hepoly::data {

namespace {

// Box-Muller over raw mt19937_64 output; deterministic across platforms.
double gaussian(std::mt19937_64& rng) {
    double u1;
    do {
        u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::string_view cell =
            trim(std::string_view(line).substr(start, comma - start));
        cells.emplace_back(cell);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace

Dataset generate_synthetic(std::size_t n, SyntheticKind kind, double noise_sd,
                           std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("generate_synthetic: need at least 2 samples");
    if (noise_sd < 0.0)
        throw std::invalid_argument("generate_synthetic: noise_sd must be >= 0");
    std::mt19937_64 rng(seed);
    const double a = 0.5 + 0.5 * (ckks::uniform_pm1(rng) + 1.0);  // [0.5, 1.5]
    const double b = 0.5 * ckks::uniform_pm1(rng);
    const double c = 0.5 * ckks::uniform_pm1(rng);
    Dataset ds;
    ds.feature_names = {"x"};
    ds.target_units = "";
    ds.features.reserve(n);
    ds.target.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ckks::uniform_pm1(rng);
        double y = (kind == SyntheticKind::linear) ? a * x + b : a * x * x * x + b * x + c;
        if (noise_sd > 0.0) y += noise_sd * gaussian(rng);
        ds.features.push_back({x});
        ds.target.push_back(y);
    }
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open file: " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_csv: empty file: " + path.string());
    const std::vector<std::string> header = split_line(line);
    std::size_t target_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == target_column) target_idx = i;
    if (target_idx == header.size())
        throw std::runtime_error("load_csv: target column '" + target_column +
                                 "' not found in header");

    Dataset ds;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != target_idx) ds.feature_names.push_back(header[i]);
    ds.target_units = (target_column == "MEDV") ? "10^3 USD" : "";

    std::size_t row_number = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("load_csv: row " + std::to_string(row_number) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(header.size() - 1);
        double target_value = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v = 0.0;
            const std::string& cell = cells[i];
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw std::runtime_error("load_csv: unparsable cell at row " +
                                         std::to_string(row_number) + ", column '" +
                                         header[i] + "'");
            if (i == target_idx)
                target_value = v;
            else
                row.push_back(v);
        }
        ds.features.push_back(std::move(row));
        ds.target.push_back(target_value);
    }
    if (ds.features.empty())
        throw std::runtime_error("load_csv: no data rows in " + path.string());
    return ds;
}

ScalerParams fit_scaler(const Dataset& ds) {
    if (ds.rows() == 0) throw std::invalid_argument("fit_scaler: empty dataset");
    const std::size_t d = ds.cols();
    ScalerParams sp;
    sp.feature_min.assign(d, std::numeric_limits<double>::infinity());
    sp.feature_max.assign(d, -std::numeric_limits<double>::infinity());
    for (const auto& row : ds.features)
        for (std::size_t j = 0; j < d; ++j) {
            sp.feature_min[j] = std::min(sp.feature_min[j], row[j]);
            sp.feature_max[j] = std::max(sp.feature_max[j], row[j]);
        }
    const auto [tmin, tmax] = std::minmax_element(ds.target.begin(), ds.target.end());
    sp.target_min = *tmin;
    sp.target_max = *tmax;
    return sp;
}

namespace {

double scale_value(double x, double lo, double hi) {
    if (hi <= lo) return 0.0;  // constant column
    return 2.0 * (x - lo) / (hi - lo) - 1.0;
}

}  // namespace

Dataset transform(const Dataset& ds, const ScalerParams& sp) {
    if (ds.cols() != sp.feature_min.size())
        throw std::invalid_argument("transform: scaler dimension mismatch");
    Dataset out = ds;
    for (auto& row : out.features)
        for (std::size_t j = 0; j < row.size(); ++j)
            row[j] = scale_value(row[j], sp.feature_min[j], sp.feature_max[j]);
    for (double& y : out.target) y = scale_value(y, sp.target_min, sp.target_max);
    return out;
}

std::vector<double> inverse_transform_target(std::span<const double> values,
                                             const ScalerParams& sp) {
    std::vector<double> out(values.begin(), values.end());
    const double range = sp.target_max - sp.target_min;
    for (double& v : out)
        v = (range > 0.0) ? (v + 1.0) * 0.5 * range + sp.target_min : sp.target_min;
    return out;
}

SplitIndices train_test_split(std::size_t n, double test_fraction, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("train_test_split: need at least 2 samples");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("train_test_split: test_fraction must be in (0, 1)");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Fisher-Yates with raw rng output; std::shuffle is not reproducible
    // across standard libraries.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(idx[i], idx[j]);
    }
    std::size_t test_count = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * test_fraction));
    test_count = std::clamp<std::size_t>(test_count, 1, n - 1);
    SplitIndices split;
    split.seed = seed;
    split.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(test_count));
    split.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(test_count), idx.end());
    return split;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
    Dataset out;
    out.feature_names = ds.feature_names;
    out.target_units = ds.target_units;
    out.features.reserve(indices.size());
    out.target.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= ds.rows()) throw std::out_of_range("subset: index out of range");
        out.features.push_back(ds.features[i]);
        out.target.push_back(ds.target[i]);
    }
    return out;
}

MetricsReport compute_metrics(std::span<const double> y_true,
                              std::span<const double> y_pred, std::string units) {
    if (y_true.empty() || y_true.size() != y_pred.size())
        throw std::invalid_argument("compute_metrics: length mismatch or empty input");
    const double n = static_cast<double>(y_true.size());
    double abs_sum = 0.0, sq_sum = 0.0, mean = 0.0;
    for (double y : y_true) mean += y;
    mean /= n;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double e = y_pred[i] - y_true[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    }
    MetricsReport r;
    r.units = std::move(units);
    r.mae = abs_sum / n;
    r.rmse = std::sqrt(sq_sum / n);
    if (ss_tot > 0.0) {
        r.r2 = 1.0 - sq_sum / ss_tot;
        r.r2_defined = true;
    } else {
        r.r2 = std::numeric_limits<double>::quiet_NaN();
        r.r2_defined = false;
    }
    return r;
}

}  // namespace hepoly::data
