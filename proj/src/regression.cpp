/**
 * @file regression.cpp
 * @license Apache-2.0
 */

#include "hepoly/regression.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hepoly/detail/textio.hpp"
#include "hepoly/ops.hpp"

namespace hepoly::regression {

std::size_t expanded_size(const FeatureMapSpec& spec, std::size_t input_dim) {
    return (spec.include_intercept ? 1 : 0) + spec.degree * input_dim;
}

std::vector<double> expand_features(std::span<const double> row,
                                    const FeatureMapSpec& spec) {
    if (row.empty()) throw std::invalid_argument("expand_features: empty row");
    if (spec.degree < 1) throw std::invalid_argument("expand_features: degree must be >= 1");
    std::vector<double> out;
    out.reserve(expanded_size(spec, row.size()));
    if (spec.include_intercept) out.push_back(1.0);
    for (double x : row) {
        double pow = x;
        out.push_back(pow);
        for (std::size_t k = 2; k <= spec.degree; ++k) {
            pow *= x;
            out.push_back(pow);
        }
    }
    return out;
}

std::vector<ckks::Ciphertext> expand_features_enc(std::span<const ckks::Ciphertext> row,
                                                  const FeatureMapSpec& spec,
                                                  const ckks::Ciphertext& encrypted_one) {
    if (row.empty()) throw std::invalid_argument("expand_features_enc: empty row");
    if (spec.degree < 1)
        throw std::invalid_argument("expand_features_enc: degree must be >= 1");
    std::vector<ckks::Ciphertext> out;
    out.reserve(expanded_size(spec, row.size()));
    if (spec.include_intercept) out.push_back(encrypted_one);
    for (const ckks::Ciphertext& x : row) {
        ckks::Ciphertext pow = x;
        out.push_back(pow);
        for (std::size_t k = 2; k <= spec.degree; ++k) {
            pow = ops::mul_ct(pow, x);
            out.push_back(pow);
        }
    }
    return out;
}

NormalSystem accumulate_normal_system(
    std::span<const std::vector<ckks::Ciphertext>> expansions,
    std::span<const ckks::Ciphertext> targets) {
    if (expansions.empty())
        throw std::invalid_argument("accumulate_normal_system: no samples");
    if (expansions.size() != targets.size())
        throw std::invalid_argument("accumulate_normal_system: sample/target count mismatch");
    const std::size_t p = expansions.front().size();
    for (const auto& e : expansions)
        if (e.size() != p)
            throw std::invalid_argument("accumulate_normal_system: ragged expansions");

    NormalSystem sys;
    sys.a.assign(p, std::vector<ckks::Ciphertext>(p));
    sys.b.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        for (std::size_t l = k; l < p; ++l) {
            ckks::Ciphertext acc = ops::mul_ct(expansions[0][k], expansions[0][l]);
            for (std::size_t i = 1; i < expansions.size(); ++i)
                acc = ops::add(acc, ops::mul_ct(expansions[i][k], expansions[i][l]));
            sys.a[k][l] = acc;
            sys.a[l][k] = std::move(acc);  // symmetric by construction
        }
        ckks::Ciphertext acc = ops::mul_ct(expansions[0][k], targets[0]);
        for (std::size_t i = 1; i < expansions.size(); ++i)
            acc = ops::add(acc, ops::mul_ct(expansions[i][k], targets[i]));
        sys.b[k] = std::move(acc);
    }
    return sys;
}

namespace {

// Gaussian elimination with partial pivoting; returns false on a pivot
// smaller than tol relative to the matrix scale.
bool try_solve(std::vector<std::vector<double>> a, std::vector<double> x,
               std::vector<double>& out) {
    const std::size_t p = a.size();
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(scale, 1.0);
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) <= tol) return false;
        std::swap(a[pivot], a[col]);
        std::swap(x[pivot], x[col]);
        for (std::size_t r = col + 1; r < p; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < p; ++c) a[r][c] -= f * a[col][c];
            x[r] -= f * x[col];
        }
    }
    out.assign(p, 0.0);
    for (std::size_t r = p; r-- > 0;) {
        double v = x[r];
        for (std::size_t c = r + 1; c < p; ++c) v -= a[r][c] * out[c];
        out[r] = v / a[r][r];
    }
    return true;
}

}  // namespace

std::vector<double> solve_system(const std::vector<std::vector<double>>& a,
                                 std::span<const double> b, bool* used_ridge) {
    const std::size_t p = a.size();
    if (p == 0 || b.size() != p)
        throw std::invalid_argument("solve_system: dimension mismatch");
    double max_abs = 0.0, max_asym = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        if (a[k].size() != p) throw std::invalid_argument("solve_system: matrix not square");
        for (std::size_t l = 0; l < p; ++l) {
            if (!std::isfinite(a[k][l]))
                throw std::invalid_argument("solve_system: non-finite matrix entry");
            max_abs = std::max(max_abs, std::abs(a[k][l]));
            max_asym = std::max(max_asym, std::abs(a[k][l] - a[l][k]));
        }
        if (!std::isfinite(b[k]))
            throw std::invalid_argument("solve_system: non-finite rhs entry");
    }
    if (max_asym > 1e-6 * std::max(max_abs, 1.0))
        throw std::invalid_argument("solve_system: matrix is not symmetric");

    if (used_ridge) *used_ridge = false;
    std::vector<double> theta;
    std::vector<double> rhs(b.begin(), b.end());
    if (try_solve(a, rhs, theta)) return theta;

    // Ridge fallback: lambda scaled off the trace.
    double trace = 0.0;
    for (std::size_t k = 0; k < p; ++k) trace += a[k][k];
    double lambda = 1e-8 * trace / static_cast<double>(p);
    if (!(lambda > 0.0)) lambda = 1e-12;
    std::vector<std::vector<double>> ar = a;
    for (std::size_t k = 0; k < p; ++k) ar[k][k] += lambda;
    if (!try_solve(ar, rhs, theta))
        throw std::runtime_error("solve_system: singular even with ridge fallback");
    if (used_ridge) *used_ridge = true;
    return theta;
}

RegressionModel fit_plain(const data::Dataset& scaled, const FeatureMapSpec& spec,
                          const data::ScalerParams& scaler) {
    if (scaled.rows() == 0) throw std::invalid_argument("fit: empty dataset");
    const std::size_t n = scaled.rows();
    const std::size_t p = expanded_size(spec, scaled.cols());
    std::vector<std::vector<double>> expansions;
    expansions.reserve(n);
    for (const auto& row : scaled.features) expansions.push_back(expand_features(row, spec));

    // Same accumulation order as the encrypted path.
    std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
    std::vector<double> b(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        for (std::size_t l = k; l < p; ++l) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += expansions[i][k] * expansions[i][l];
            a[k][l] = acc;
            a[l][k] = acc;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += expansions[i][k] * scaled.target[i];
        b[k] = acc;
    }

    RegressionModel model;
    model.spec = spec;
    model.scaler = scaler;
    model.fit_mode = FitMode::plain;
    model.theta = solve_system(a, b, &model.used_ridge);
    return model;
}

RegressionModel fit_encrypted(const data::EncryptedDataset& eds,
                              const FeatureMapSpec& spec,
                              const data::ScalerParams& scaler,
                              const ckks::Ciphertext& encrypted_one,
                              AggregateDecryptor& aggregates) {
    if (eds.rows() == 0) throw std::invalid_argument("fit: empty dataset");
    std::vector<std::vector<ckks::Ciphertext>> expansions;
    expansions.reserve(eds.rows());
    for (const auto& row : eds.features)
        expansions.push_back(expand_features_enc(row, spec, encrypted_one));
    const NormalSystem sys = accumulate_normal_system(expansions, eds.target);

    // Only the p^2 + p aggregate sums cross the decryption boundary.
    const std::size_t p = sys.b.size();
    std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
    std::vector<double> b(p, 0.0);
    for (std::size_t k = 0; k < p; ++k)
        for (std::size_t l = 0; l < p; ++l)
            a[k][l] = aggregates.decrypt_aggregate(sys.a[k][l]);
    for (std::size_t k = 0; k < p; ++k) b[k] = aggregates.decrypt_aggregate(sys.b[k]);

    RegressionModel model;
    model.spec = spec;
    model.scaler = scaler;
    model.fit_mode = FitMode::enc;
    model.theta = solve_system(a, b, &model.used_ridge);
    return model;
}

double predict_plain(const RegressionModel& model, std::span<const double> x_scaled) {
    const std::vector<double> phi = expand_features(x_scaled, model.spec);
    if (phi.size() != model.theta.size())
        throw std::invalid_argument("predict: input dimension does not match model");
    double acc = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) acc += model.theta[j] * phi[j];
    return acc;
}

ckks::Ciphertext predict_encrypted(const RegressionModel& model,
                                   std::span<const ckks::Ciphertext> x_row,
                                   const ckks::Ciphertext& encrypted_one) {
    const std::vector<ckks::Ciphertext> phi =
        expand_features_enc(x_row, model.spec, encrypted_one);
    if (phi.size() != model.theta.size())
        throw std::invalid_argument("predict: input dimension does not match model");
    ckks::Ciphertext acc = ops::mul_const(phi[0], model.theta[0]);
    for (std::size_t j = 1; j < phi.size(); ++j)
        acc = ops::add(acc, ops::mul_const(phi[j], model.theta[j]));
    return acc;
}

void save_model(const RegressionModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("persistence error: cannot open model file for writing: " +
                                 path.string());
    out << "version=1\n";
    out << "model=linreg\n";
    out << "fit_mode=" << (model.fit_mode == FitMode::enc ? "enc" : "plain") << "\n";
    out << "degree=" << model.spec.degree << "\n";
    out << "include_intercept=" << (model.spec.include_intercept ? 1 : 0) << "\n";
    out << "theta=" << detail::format_double_array(model.theta) << "\n";
    out << "feature_min=" << detail::format_double_array(model.scaler.feature_min) << "\n";
    out << "feature_max=" << detail::format_double_array(model.scaler.feature_max) << "\n";
    out << "target_min=" << detail::fmt_double(model.scaler.target_min) << "\n";
    out << "target_max=" << detail::fmt_double(model.scaler.target_max) << "\n";
    if (!out)
        throw std::runtime_error("persistence error: write failed: " + path.string());
}

RegressionModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("persistence error: cannot open model file: " +
                                 path.string());
    RegressionModel model;
    std::string line;
    bool have_theta = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("persistence error: malformed line in model file: " +
                                     line);
        const std::string field = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (field == "version") {
            if (detail::parse_u64(value, field) != 1)
                throw std::runtime_error(
                    "persistence error: unsupported value for field 'version'");
        } else if (field == "model") {
            if (value != "linreg")
                throw std::runtime_error("persistence error: field 'model' is not linreg");
        } else if (field == "fit_mode") {
            if (value != "enc" && value != "plain")
                throw std::runtime_error("persistence error: bad value for field 'fit_mode'");
            model.fit_mode = (value == "enc") ? FitMode::enc : FitMode::plain;
        } else if (field == "degree") {
            model.spec.degree = detail::parse_u64(value, field);
        } else if (field == "include_intercept") {
            model.spec.include_intercept = detail::parse_u64(value, field) != 0;
        } else if (field == "theta") {
            model.theta = detail::parse_double_array(value, field);
            have_theta = true;
        } else if (field == "feature_min") {
            model.scaler.feature_min = detail::parse_double_array(value, field);
        } else if (field == "feature_max") {
            model.scaler.feature_max = detail::parse_double_array(value, field);
        } else if (field == "target_min") {
            model.scaler.target_min = detail::parse_double(value, field);
        } else if (field == "target_max") {
            model.scaler.target_max = detail::parse_double(value, field);
        } else {
            throw std::runtime_error("persistence error: unknown field '" + field +
                                     "' in model file");
        }
    }
    if (!have_theta)
        throw std::runtime_error("persistence error: missing field 'theta'");
    return model;
}

}  // namespace hepoly::regression
