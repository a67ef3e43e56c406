/**
 * @file protocol.cpp
 * @license Apache-2.0
 */

#include "hepoly/protocol.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "hepoly/ops.hpp"

namespace hepoly::protocol {

// ---------------------------------------------------------------------------
// TrustedParty
// ---------------------------------------------------------------------------

TrustedParty::TrustedParty(const ckks::SchemeParams& params, ckks::SecretKey sk,
                           std::uint64_t noise_seed)
    : params_(params),
      sk_(std::move(sk)),
      map_(ckks::build_encoding_map(params, sk_)),
      noise_rng_(noise_seed) {
    params_.validate();
}

TrustedParty TrustedParty::from_key_file(const std::filesystem::path& path,
                                         std::uint64_t noise_seed) {
    ckks::KeyFile kf = ckks::load_key(path);
    return TrustedParty(kf.params, std::move(kf.sk), noise_seed);
}

ckks::Ciphertext TrustedParty::encrypt_value(double m) {
    std::lock_guard<std::mutex> lock(mu_);
    return ckks::encrypt(map_, m, params_, noise_rng_);
}

data::EncryptedDataset TrustedParty::encrypt_dataset(const data::Dataset& scaled) {
    if (scaled.rows() == 0)
        throw std::invalid_argument("encrypt_dataset: empty dataset");
    std::lock_guard<std::mutex> lock(mu_);
    data::EncryptedDataset eds;
    eds.features.reserve(scaled.rows());
    eds.target.reserve(scaled.rows());
    for (std::size_t i = 0; i < scaled.rows(); ++i) {
        std::vector<ckks::Ciphertext> row;
        row.reserve(scaled.cols());
        for (double v : scaled.features[i])
            row.push_back(ckks::encrypt(map_, v, params_, noise_rng_));
        eds.features.push_back(std::move(row));
        eds.target.push_back(ckks::encrypt(map_, scaled.target[i], params_, noise_rng_));
    }
    return eds;
}

double TrustedParty::decrypt_value(const ckks::Ciphertext& ct) {
    std::lock_guard<std::mutex> lock(mu_);
    ++decrypt_calls_;
    return ckks::decrypt(map_, ct);
}

std::vector<double> TrustedParty::decrypt_results(std::span<const ckks::Ciphertext> cts) {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<double> out;
    out.reserve(cts.size());
    for (const auto& ct : cts) {
        ++decrypt_calls_;
        out.push_back(ckks::decrypt(map_, ct));
    }
    return out;
}

double TrustedParty::decrypt_aggregate(const ckks::Ciphertext& ct) {
    return decrypt_value(ct);
}

std::vector<std::size_t> TrustedParty::smallest_k(
    std::span<const ckks::Ciphertext> distances, std::size_t k) {
    if (k < 1 || k > distances.size())
        throw std::invalid_argument("order oracle: invalid k");
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<double> plain;
    plain.reserve(distances.size());
    for (const auto& ct : distances) plain.push_back(ckks::decrypt(map_, ct));
    oracle_log_.push_back({distances.size(), k});
    return knn::k_smallest_indices(plain, k);
}

std::uint64_t TrustedParty::decrypt_calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return decrypt_calls_;
}

std::size_t TrustedParty::oracle_calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return oracle_log_.size();
}

std::vector<OracleLogEntry> TrustedParty::oracle_log() const {
    std::lock_guard<std::mutex> lock(mu_);
    return oracle_log_;
}

// ---------------------------------------------------------------------------
// TrainingServer
// ---------------------------------------------------------------------------

TrainingServer::TrainingServer(data::EncryptedDataset dataset)
    : data_(std::move(dataset)) {}

regression::RegressionModel TrainingServer::fit_regression(
    const regression::FeatureMapSpec& spec, const data::ScalerParams& scaler,
    const ckks::Ciphertext& encrypted_one, regression::AggregateDecryptor& aggregates) {
    return regression::fit_encrypted(data_, spec, scaler, encrypted_one, aggregates);
}

knn::KnnModel TrainingServer::fit_knn(std::size_t k) const {
    return knn::fit_encrypted(data_, k);
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

std::string to_string(Model m) {
    switch (m) {
        case Model::linreg: return "linreg";
        case Model::knn: return "knn";
        case Model::mlp: return "mlp";
    }
    return "?";
}

std::string to_string(Setting s) {
    switch (s) {
        case Setting::enc_enc: return "enc-enc";
        case Setting::plain_plain: return "plain-plain";
        case Setting::plain_enc: return "plain-enc";
        case Setting::enc_plain: return "enc-plain";
    }
    return "?";
}

Model parse_model(const std::string& s) {
    if (s == "linreg") return Model::linreg;
    if (s == "knn") return Model::knn;
    if (s == "mlp") return Model::mlp;
    throw std::invalid_argument("config error: unknown model '" + s + "'");
}

Setting parse_setting(const std::string& s) {
    if (s == "enc-enc") return Setting::enc_enc;
    if (s == "plain-plain") return Setting::plain_plain;
    if (s == "plain-enc") return Setting::plain_enc;
    if (s == "enc-plain") return Setting::enc_plain;
    throw std::invalid_argument("config error: unknown setting '" + s + "'");
}

void BenchConfig::validate() const {
    scheme.validate();
    if (repeats < 1) throw std::invalid_argument("config error: repeats must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("config error: test_fraction must be in (0, 1)");
    if (model == Model::knn && setting != Setting::enc_enc &&
        setting != Setting::plain_plain)
        throw std::invalid_argument(
            "config error: knn requires one data representation on both sides "
            "(enc-enc or plain-plain); mixed settings are not supported");
    if (model == Model::mlp && setting != Setting::plain_plain &&
        setting != Setting::plain_enc)
        throw std::invalid_argument(
            "config error: mlp cannot be trained on encrypted data; "
            "use plain-plain or plain-enc");
    if (model == Model::knn && knn_k < 1)
        throw std::invalid_argument("config error: k must be >= 1");
    if (model == Model::linreg && degree < 1)
        throw std::invalid_argument("config error: degree must be >= 1");
    if (model == Model::mlp) {
        mlp::TrainConfig tc;
        tc.hidden_units = hidden_units;
        tc.learning_rate = learning_rate;
        tc.epochs = epochs;
        tc.validate();
    }
}

namespace {

struct Stats {
    double mean = 0.0;
    double std_dev = 0.0;  // population std; 0 for a single repeat
};

Stats mean_std(std::span<const double> xs) {
    Stats s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(var / static_cast<double>(xs.size()));
    return s;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct RepeatOutcome {
    data::MetricsReport metrics;
    double fit_seconds = 0.0;
    double predict_seconds = 0.0;
};

RepeatOutcome run_linreg_repeat(const BenchConfig& cfg, TrustedParty& tp,
                                const data::Dataset& train_s, const data::Dataset& test_s,
                                std::span<const double> y_test,
                                const data::ScalerParams& scaler) {
    const bool enc_train =
        cfg.setting == Setting::enc_enc || cfg.setting == Setting::enc_plain;
    const bool enc_test =
        cfg.setting == Setting::enc_enc || cfg.setting == Setting::plain_enc;
    const regression::FeatureMapSpec spec{cfg.degree, true};

    RepeatOutcome out;
    auto t0 = Clock::now();
    regression::RegressionModel model;
    if (enc_train) {
        TrainingServer server(tp.encrypt_dataset(train_s));
        const ckks::Ciphertext enc_one = tp.encrypt_value(1.0);
        model = server.fit_regression(spec, scaler, enc_one, tp);
    } else {
        model = regression::fit_plain(train_s, spec, scaler);
    }
    out.fit_seconds = seconds_since(t0);

    t0 = Clock::now();
    std::vector<double> preds_scaled;
    preds_scaled.reserve(test_s.rows());
    if (enc_test) {
        const data::EncryptedDataset enc_test_rows = tp.encrypt_dataset(test_s);
        const ckks::Ciphertext enc_one = tp.encrypt_value(1.0);
        std::vector<ckks::Ciphertext> pred_cts;
        pred_cts.reserve(test_s.rows());
        for (const auto& row : enc_test_rows.features)
            pred_cts.push_back(regression::predict_encrypted(model, row, enc_one));
        preds_scaled = tp.decrypt_results(pred_cts);
    } else {
        for (const auto& row : test_s.features)
            preds_scaled.push_back(regression::predict_plain(model, row));
    }
    out.predict_seconds = seconds_since(t0);

    const std::vector<double> preds = data::inverse_transform_target(preds_scaled, scaler);
    out.metrics = data::compute_metrics(y_test, preds, test_s.target_units);
    return out;
}

RepeatOutcome run_knn_repeat(const BenchConfig& cfg, TrustedParty& tp,
                             const data::Dataset& train_s, const data::Dataset& test_s,
                             std::span<const double> y_test,
                             const data::ScalerParams& scaler) {
    RepeatOutcome out;
    if (cfg.setting == Setting::enc_enc) {
        auto t0 = Clock::now();
        TrainingServer server(tp.encrypt_dataset(train_s));
        const knn::KnnModel model = server.fit_knn(cfg.knn_k);
        out.fit_seconds = seconds_since(t0);

        t0 = Clock::now();
        const data::EncryptedDataset enc_queries = tp.encrypt_dataset(test_s);
        std::vector<ckks::Ciphertext> pred_cts;
        pred_cts.reserve(test_s.rows());
        for (const auto& row : enc_queries.features)
            pred_cts.push_back(knn::predict_encrypted(model, row, tp));
        const std::vector<double> preds_scaled = tp.decrypt_results(pred_cts);
        out.predict_seconds = seconds_since(t0);

        const std::vector<double> preds =
            data::inverse_transform_target(preds_scaled, scaler);
        out.metrics = data::compute_metrics(y_test, preds, test_s.target_units);
    } else {
        auto t0 = Clock::now();
        const knn::KnnModel model = knn::fit_plain(train_s, cfg.knn_k);
        out.fit_seconds = seconds_since(t0);

        t0 = Clock::now();
        std::vector<double> preds_scaled;
        preds_scaled.reserve(test_s.rows());
        for (const auto& row : test_s.features)
            preds_scaled.push_back(knn::predict_plain(model, row));
        out.predict_seconds = seconds_since(t0);

        const std::vector<double> preds =
            data::inverse_transform_target(preds_scaled, scaler);
        out.metrics = data::compute_metrics(y_test, preds, test_s.target_units);
    }
    return out;
}

RepeatOutcome run_mlp_repeat(const BenchConfig& cfg, TrustedParty& tp,
                             const data::Dataset& train_s, const data::Dataset& test_s,
                             std::span<const double> y_test,
                             const data::ScalerParams& scaler, std::uint64_t repeat_seed) {
    mlp::TrainConfig tc;
    tc.hidden_units = cfg.hidden_units;
    tc.learning_rate = cfg.learning_rate;
    tc.epochs = cfg.epochs;
    tc.seed = repeat_seed;
    tc.train_activation = mlp::Activation::relu;

    RepeatOutcome out;
    auto t0 = Clock::now();
    const mlp::TrainResult trained = mlp::train_plain(train_s, tc);
    out.fit_seconds = seconds_since(t0);

    t0 = Clock::now();
    std::vector<double> preds_scaled;
    preds_scaled.reserve(test_s.rows());
    if (cfg.setting == Setting::plain_enc) {
        // Encrypted inference: identity activation, plaintext weights.
        const data::EncryptedDataset enc_queries = tp.encrypt_dataset(test_s);
        std::vector<ckks::Ciphertext> pred_cts;
        pred_cts.reserve(test_s.rows());
        for (const auto& row : enc_queries.features)
            pred_cts.push_back(mlp::forward_encrypted(trained.params, row));
        preds_scaled = tp.decrypt_results(pred_cts);
    } else {
        for (const auto& row : test_s.features)
            preds_scaled.push_back(
                mlp::forward_plain(trained.params, row, tc.train_activation));
    }
    out.predict_seconds = seconds_since(t0);

    const std::vector<double> preds = data::inverse_transform_target(preds_scaled, scaler);
    out.metrics = data::compute_metrics(y_test, preds, test_s.target_units);
    return out;
}

}  // namespace

BenchReport run_experiment(const BenchConfig& cfg) {
    cfg.validate();

    data::Dataset ds;
    std::string label;
    if (cfg.dataset_csv.empty()) {
        ds = data::generate_synthetic(cfg.synth_n, cfg.synth_kind, cfg.synth_noise_sd,
                                      cfg.base_seed);
        label = "synthetic";
    } else {
        ds = data::load_csv(cfg.dataset_csv, cfg.target_column);
        label = std::filesystem::path(cfg.dataset_csv).filename().string();
    }

    const std::uint64_t noise_seed = cfg.key_seed ^ (cfg.base_seed * 0x9E3779B97F4A7C15ULL);
    TrustedParty tp =
        cfg.key_file.empty()
            ? TrustedParty(cfg.scheme, ckks::keygen(cfg.scheme, cfg.key_seed), noise_seed)
            : TrustedParty::from_key_file(cfg.key_file, noise_seed);

    BenchReport report;
    report.config = cfg;
    report.dataset_label = label;
    std::vector<double> maes, rmses, r2s;
    double fit_total = 0.0, predict_total = 0.0;

    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t split_seed = cfg.base_seed + r;
        const data::SplitIndices split =
            data::train_test_split(ds.rows(), cfg.test_fraction, split_seed);
        const data::Dataset train = data::subset(ds, split.train);
        const data::Dataset test = data::subset(ds, split.test);
        const data::ScalerParams scaler = data::fit_scaler(train);
        const data::Dataset train_s = data::transform(train, scaler);
        const data::Dataset test_s = data::transform(test, scaler);

        RepeatOutcome outcome;
        switch (cfg.model) {
            case Model::linreg:
                outcome = run_linreg_repeat(cfg, tp, train_s, test_s, test.target, scaler);
                break;
            case Model::knn:
                outcome = run_knn_repeat(cfg, tp, train_s, test_s, test.target, scaler);
                break;
            case Model::mlp:
                outcome = run_mlp_repeat(cfg, tp, train_s, test_s, test.target, scaler,
                                         split_seed);
                break;
        }
        report.per_repeat.push_back(outcome.metrics);
        maes.push_back(outcome.metrics.mae);
        rmses.push_back(outcome.metrics.rmse);
        r2s.push_back(outcome.metrics.r2);
        fit_total += outcome.fit_seconds;
        predict_total += outcome.predict_seconds;
    }

    const Stats ms = mean_std(maes), rs = mean_std(rmses), r2 = mean_std(r2s);
    report.mae_mean = ms.mean;
    report.mae_std = ms.std_dev;
    report.rmse_mean = rs.mean;
    report.rmse_std = rs.std_dev;
    report.r2_mean = r2.mean;
    report.r2_std = r2.std_dev;
    report.fit_seconds = fit_total / static_cast<double>(cfg.repeats);
    report.predict_seconds = predict_total / static_cast<double>(cfg.repeats);
    report.decrypt_calls = tp.decrypt_calls();
    report.oracle_calls = tp.oracle_calls();
    return report;
}

std::string format_table(const BenchReport& report) {
    const std::string units = report.per_repeat.empty() || report.per_repeat[0].units.empty()
                                  ? "unitless"
                                  : report.per_repeat[0].units;
    char buf[256];
    std::ostringstream out;
    out << "model=" << to_string(report.config.model)
        << " setting=" << to_string(report.config.setting)
        << " dataset=" << report.dataset_label << " repeats=" << report.config.repeats
        << "\n";
    std::snprintf(buf, sizeof(buf), "  MAE  (%s): %.4f +/- %.4f\n", units.c_str(),
                  report.mae_mean, report.mae_std);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  RMSE (%s): %.4f +/- %.4f\n", units.c_str(),
                  report.rmse_mean, report.rmse_std);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  R^2           : %.4f +/- %.4f\n", report.r2_mean,
                  report.r2_std);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  fit time      : %.4f s\n", report.fit_seconds);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  predict time  : %.4f s\n", report.predict_seconds);
    out << buf;
    out << "  decrypt calls : " << report.decrypt_calls << "\n";
    out << "  oracle calls  : " << report.oracle_calls << "\n";
    return out.str();
}

const char* const kCsvHeader =
    "model,setting,dataset,repeats,mae_mean,mae_std,rmse_mean,rmse_std,"
    "r2_mean,r2_std,fit_s,predict_s,decrypt_calls,oracle_calls";

std::string format_csv_row(const BenchReport& report) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%s,%s,%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%llu,%zu",
                  to_string(report.config.model).c_str(),
                  to_string(report.config.setting).c_str(), report.dataset_label.c_str(),
                  report.config.repeats, report.mae_mean, report.mae_std, report.rmse_mean,
                  report.rmse_std, report.r2_mean, report.r2_std, report.fit_seconds,
                  report.predict_seconds,
                  static_cast<unsigned long long>(report.decrypt_calls),
                  report.oracle_calls);
    return std::string(buf);
}

}  // namespace hepoly::protocol
