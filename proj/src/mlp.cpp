/**
 * @file mlp.cpp
 * @license Apache-2.0
 */

#include "hepoly/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "hepoly/detail/textio.hpp"
#include "hepoly/ops.hpp"

namespace hepoly::mlp {

namespace {

double activate(double z, Activation a) {
    return (a == Activation::relu) ? std::max(z, 0.0) : z;
}

double activate_grad(double z, Activation a) {
    return (a == Activation::relu) ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

std::vector<double> hidden_pre(const MlpParams& p, std::span<const double> x) {
    std::vector<double> z1(p.hidden_units());
    for (std::size_t u = 0; u < p.hidden_units(); ++u) {
        double acc = p.b1[u];
        for (std::size_t j = 0; j < x.size(); ++j) acc += p.w1[u][j] * x[j];
        z1[u] = acc;
    }
    return z1;
}

}  // namespace

void TrainConfig::validate() const {
    if (hidden_units < 1)
        throw std::invalid_argument("mlp config: hidden_units must be >= 1");
    if (epochs < 1) throw std::invalid_argument("mlp config: epochs must be >= 1");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("mlp config: learning_rate must be > 0");
}

MlpParams init_params(std::size_t input_dim, const TrainConfig& config) {
    config.validate();
    if (input_dim < 1) throw std::invalid_argument("mlp: input_dim must be >= 1");
    const std::size_t h = config.hidden_units;
    std::mt19937_64 rng(config.seed);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(input_dim + h));
    const double lim2 = std::sqrt(6.0 / static_cast<double>(h + 1));
    MlpParams p;
    p.w1.assign(h, std::vector<double>(input_dim, 0.0));
    for (auto& row : p.w1)
        for (double& w : row) w = lim1 * ckks::uniform_pm1(rng);
    p.b1.assign(h, 0.0);
    p.w2.resize(h);
    for (double& w : p.w2) w = lim2 * ckks::uniform_pm1(rng);
    p.b2 = 0.0;
    return p;
}

double forward_plain(const MlpParams& params, std::span<const double> x,
                     Activation activation) {
    if (x.size() != params.input_dim())
        throw std::invalid_argument("mlp forward: input dimension mismatch");
    const std::vector<double> z1 = hidden_pre(params, x);
    double out = params.b2;
    for (std::size_t u = 0; u < params.hidden_units(); ++u)
        out += params.w2[u] * activate(z1[u], activation);
    return out;
}

double mse_loss(const MlpParams& params, const data::Dataset& scaled,
                Activation activation) {
    if (scaled.rows() == 0) throw std::invalid_argument("mlp loss: empty dataset");
    double acc = 0.0;
    for (std::size_t i = 0; i < scaled.rows(); ++i) {
        const double e = forward_plain(params, scaled.features[i], activation) -
                         scaled.target[i];
        acc += e * e;
    }
    return acc / static_cast<double>(scaled.rows());
}

Gradients mse_gradients(const MlpParams& params, const data::Dataset& scaled,
                        Activation activation) {
    if (scaled.rows() == 0) throw std::invalid_argument("mlp gradients: empty dataset");
    const std::size_t h = params.hidden_units();
    const std::size_t d = params.input_dim();
    const double inv_n = 1.0 / static_cast<double>(scaled.rows());
    Gradients g;
    g.w1.assign(h, std::vector<double>(d, 0.0));
    g.b1.assign(h, 0.0);
    g.w2.assign(h, 0.0);
    g.b2 = 0.0;
    for (std::size_t i = 0; i < scaled.rows(); ++i) {
        const auto& x = scaled.features[i];
        const std::vector<double> z1 = hidden_pre(params, x);
        double yhat = params.b2;
        for (std::size_t u = 0; u < h; ++u)
            yhat += params.w2[u] * activate(z1[u], activation);
        const double gy = 2.0 * (yhat - scaled.target[i]) * inv_n;
        g.b2 += gy;
        for (std::size_t u = 0; u < h; ++u) {
            const double a1 = activate(z1[u], activation);
            g.w2[u] += gy * a1;
            const double gz = gy * params.w2[u] * activate_grad(z1[u], activation);
            g.b1[u] += gz;
            for (std::size_t j = 0; j < d; ++j) g.w1[u][j] += gz * x[j];
        }
    }
    return g;
}

TrainResult train_plain(const data::Dataset& scaled, const TrainConfig& config) {
    config.validate();
    if (scaled.rows() == 0) throw std::invalid_argument("mlp train: empty dataset");
    TrainResult result;
    result.params = init_params(scaled.cols(), config);
    result.loss_history.reserve(config.epochs + 1);
    result.loss_history.push_back(
        mse_loss(result.params, scaled, config.train_activation));
    const double lr = config.learning_rate;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const Gradients g = mse_gradients(result.params, scaled, config.train_activation);
        for (std::size_t u = 0; u < result.params.hidden_units(); ++u) {
            for (std::size_t j = 0; j < result.params.input_dim(); ++j)
                result.params.w1[u][j] -= lr * g.w1[u][j];
            result.params.b1[u] -= lr * g.b1[u];
            result.params.w2[u] -= lr * g.w2[u];
        }
        result.params.b2 -= lr * g.b2;
        const double loss = mse_loss(result.params, scaled, config.train_activation);
        if (!std::isfinite(loss))
            throw std::runtime_error("mlp train: loss diverged at epoch " +
                                     std::to_string(epoch));
        result.loss_history.push_back(loss);
    }
    return result;
}

ckks::Ciphertext forward_encrypted(const MlpParams& params,
                                   std::span<const ckks::Ciphertext> x_cts) {
    if (x_cts.size() != params.input_dim())
        throw std::invalid_argument("mlp forward: input dimension mismatch");
    const std::size_t h = params.hidden_units();
    std::vector<ckks::Ciphertext> hidden;
    hidden.reserve(h);
    for (std::size_t u = 0; u < h; ++u) {
        ckks::Ciphertext acc = ops::mul_const(x_cts[0], params.w1[u][0]);
        for (std::size_t j = 1; j < x_cts.size(); ++j)
            acc = ops::add(acc, ops::mul_const(x_cts[j], params.w1[u][j]));
        hidden.push_back(ops::add_const(acc, params.b1[u]));
    }
    ckks::Ciphertext out = ops::mul_const(hidden[0], params.w2[0]);
    for (std::size_t u = 1; u < h; ++u)
        out = ops::add(out, ops::mul_const(hidden[u], params.w2[u]));
    return ops::add_const(out, params.b2);
}

void save_params(const MlpParams& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("persistence error: cannot open params file for writing: " +
                                 path.string());
    std::vector<double> w1_flat;
    w1_flat.reserve(params.hidden_units() * params.input_dim());
    for (const auto& row : params.w1) w1_flat.insert(w1_flat.end(), row.begin(), row.end());
    out << "version=1\n";
    out << "model=mlp\n";
    out << "input_dim=" << params.input_dim() << "\n";
    out << "hidden_units=" << params.hidden_units() << "\n";
    out << "w1=" << detail::format_double_array(w1_flat) << "\n";
    out << "b1=" << detail::format_double_array(params.b1) << "\n";
    out << "w2=" << detail::format_double_array(params.w2) << "\n";
    out << "b2=" << detail::fmt_double(params.b2) << "\n";
    if (!out)
        throw std::runtime_error("persistence error: write failed: " + path.string());
}

MlpParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("persistence error: cannot open params file: " +
                                 path.string());
    std::string line;
    std::size_t input_dim = 0, hidden_units = 0;
    std::vector<double> w1_flat, b1, w2;
    double b2 = 0.0;
    bool have_w1 = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("persistence error: malformed line in params file: " +
                                     line);
        const std::string field = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (field == "version") {
            if (detail::parse_u64(value, field) != 1)
                throw std::runtime_error(
                    "persistence error: unsupported value for field 'version'");
        } else if (field == "model") {
            if (value != "mlp")
                throw std::runtime_error("persistence error: field 'model' is not mlp");
        } else if (field == "input_dim") {
            input_dim = detail::parse_u64(value, field);
        } else if (field == "hidden_units") {
            hidden_units = detail::parse_u64(value, field);
        } else if (field == "w1") {
            w1_flat = detail::parse_double_array(value, field);
            have_w1 = true;
        } else if (field == "b1") {
            b1 = detail::parse_double_array(value, field);
        } else if (field == "w2") {
            w2 = detail::parse_double_array(value, field);
        } else if (field == "b2") {
            b2 = detail::parse_double(value, field);
        } else {
            throw std::runtime_error("persistence error: unknown field '" + field +
                                     "' in params file");
        }
    }
    if (!have_w1 || input_dim == 0 || hidden_units == 0)
        throw std::runtime_error("persistence error: params file missing fields");
    if (w1_flat.size() != hidden_units * input_dim)
        throw std::runtime_error("persistence error: field 'w1' has wrong length");
    if (b1.size() != hidden_units)
        throw std::runtime_error("persistence error: field 'b1' has wrong length");
    if (w2.size() != hidden_units)
        throw std::runtime_error("persistence error: field 'w2' has wrong length");
    MlpParams p;
    p.w1.assign(hidden_units, std::vector<double>(input_dim, 0.0));
    for (std::size_t u = 0; u < hidden_units; ++u)
        for (std::size_t j = 0; j < input_dim; ++j) p.w1[u][j] = w1_flat[u * input_dim + j];
    p.b1 = std::move(b1);
    p.w2 = std::move(w2);
    p.b2 = b2;
    return p;
}

}  // namespace hepoly::mlp
