/**
 * @file hepoly_cli.cpp
 * @brief Command line front end: keygen, encrypt, bench, train, predict.
 * @license Apache-2.0
 */

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hepoly/ckks.hpp"
#include "hepoly/data.hpp"
#include "hepoly/mlp.hpp"
#include "hepoly/protocol.hpp"
#include "hepoly/regression.hpp"

namespace {

using namespace hepoly;

// HEPOLY_SEED is the fallback when no --seed is given.
std::uint64_t default_seed(std::uint64_t hard_default) {
    if (const char* env = std::getenv("HEPOLY_SEED")) {
        std::uint64_t v = 0;
        const std::string s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
        std::cerr << "hepoly: ignoring malformed HEPOLY_SEED='" << s << "'\n";
    }
    return hard_default;
}

int run_keygen(std::size_t n, std::uint64_t seed, double noise_epsilon,
               const std::string& out) {
    ckks::SchemeParams params = ckks::SchemeParams::for_degree(n);
    params.noise_epsilon = noise_epsilon;
    const auto sk = ckks::keygen(params, seed);
    ckks::save_key(sk, params, out);
    std::cout << "wrote key (N=" << n << ", seed=" << seed << ") to " << out << "\n";
    if (n < (1u << 14))
        std::cout << "note: N=" << n
                  << " is a demonstration size with no real security margin\n";
    return 0;
}

int run_encrypt(const std::string& key_path, double value, const std::string& out,
                bool text, std::uint64_t noise_seed) {
    const auto kf = ckks::load_key(key_path);
    const auto map = ckks::build_encoding_map(kf.params, kf.sk);
    std::mt19937_64 rng(noise_seed);
    const auto ct = ckks::encrypt(map, value, kf.params, rng);
    if (text) {
        std::ofstream f(out, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open output file: " + out);
        f << ckks::serialize_ct_text(ct) << "\n";
    } else {
        const auto rec = ckks::serialize_ct(ct);
        std::ofstream f(out, std::ios::trunc | std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file: " + out);
        f.write(reinterpret_cast<const char*>(rec.data()),
                static_cast<std::streamsize>(rec.size()));
    }
    std::cout << "wrote ciphertext record to " << out << "\n";
    return 0;
}

int run_bench(protocol::BenchConfig cfg, const std::string& csv_out) {
    const auto report = protocol::run_experiment(cfg);
    std::cout << protocol::format_table(report);
    if (!csv_out.empty()) {
        std::ofstream f(csv_out, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open CSV output file: " + csv_out);
        f << protocol::kCsvHeader << "\n" << protocol::format_csv_row(report) << "\n";
        std::cout << "wrote CSV row to " << csv_out << "\n";
    }
    return 0;
}

int run_train(const std::string& model_name, const std::string& dataset,
              const std::string& target, const std::string& setting_name,
              const std::string& key_path, std::uint64_t seed, std::size_t degree,
              std::size_t hidden, double lr, std::size_t epochs, const std::string& out) {
    if (model_name != "linreg" && model_name != "mlp")
        throw std::invalid_argument(
            "train supports linreg and mlp; knn has no trainable artifact (fitting "
            "is storage), run it through `bench`");
    const auto full = data::load_csv(dataset, target);
    const auto scaler = data::fit_scaler(full);
    const auto scaled = data::transform(full, scaler);

    if (model_name == "linreg") {
        const auto setting = protocol::parse_setting(setting_name);
        const bool enc_train = setting == protocol::Setting::enc_enc ||
                               setting == protocol::Setting::enc_plain;
        const regression::FeatureMapSpec spec{degree, true};
        regression::RegressionModel model;
        if (enc_train) {
            auto tp = key_path.empty()
                          ? protocol::TrustedParty(ckks::SchemeParams{},
                                                   ckks::keygen(ckks::SchemeParams{}, seed),
                                                   seed)
                          : protocol::TrustedParty::from_key_file(key_path, seed);
            protocol::TrainingServer server(tp.encrypt_dataset(scaled));
            model = server.fit_regression(spec, scaler, tp.encrypt_value(1.0), tp);
            std::cout << "encrypted fit: " << tp.decrypt_calls()
                      << " aggregate decryptions\n";
        } else {
            model = regression::fit_plain(scaled, spec, scaler);
        }
        regression::save_model(model, out);
        std::cout << "wrote regression model to " << out << "\n";
        return 0;
    }
    if (model_name == "mlp") {
        mlp::TrainConfig tc;
        tc.hidden_units = hidden;
        tc.learning_rate = lr;
        tc.epochs = epochs;
        tc.seed = seed;
        const auto trained = mlp::train_plain(scaled, tc);
        mlp::save_params(trained.params, out);
        std::cout << "final training loss " << trained.loss_history.back() << ", wrote "
                  << out << "\n";
        std::cout << "note: scaling parameters are not stored with mlp params; "
                     "apply the same scaling at inference\n";
        return 0;
    }
    return 1;  // unreachable; model name validated above
}

int run_predict(const std::string& model_path, const std::string& dataset,
                const std::string& target, const std::string& out) {
    const auto model = regression::load_model(model_path);
    const auto full = data::load_csv(dataset, target);
    const auto scaled = data::transform(full, model.scaler);
    std::vector<double> preds_scaled;
    preds_scaled.reserve(scaled.rows());
    for (const auto& row : scaled.features)
        preds_scaled.push_back(regression::predict_plain(model, row));
    const auto preds = data::inverse_transform_target(preds_scaled, model.scaler);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out, std::ios::trunc);
        if (!file) throw std::runtime_error("cannot open output file: " + out);
        os = &file;
    }
    *os << "prediction\n";
    for (double p : preds) *os << p << "\n";
    if (!out.empty()) std::cout << "wrote " << preds.size() << " predictions to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hepoly: privacy-preserving regression on a toy CKKS-style scheme"};
    app.require_subcommand(1);

    // keygen
    auto* keygen = app.add_subcommand("keygen", "generate a secret key file");
    std::size_t kg_n = 8;
    std::uint64_t kg_seed = default_seed(42);
    double kg_eps = 1e-6;
    std::string kg_out = "key.txt";
    keygen->add_option("--n", kg_n, "polynomial degree N (power of two)");
    keygen->add_option("--seed", kg_seed, "key generation seed");
    keygen->add_option("--noise-epsilon", kg_eps, "slot-masking noise bound");
    keygen->add_option("--out", kg_out, "output key file")->required();

    // encrypt
    auto* encrypt = app.add_subcommand("encrypt", "encrypt one value to a record file");
    std::string en_key, en_out = "ct.bin";
    double en_value = 0.0;
    bool en_text = false;
    std::uint64_t en_seed = default_seed(1);
    encrypt->add_option("--key", en_key, "key file")->required();
    encrypt->add_option("--value", en_value, "real value to encrypt")->required();
    encrypt->add_option("--out", en_out, "output record file")->required();
    encrypt->add_flag("--text", en_text, "write the text record format");
    encrypt->add_option("--noise-seed", en_seed, "seed for the masking noise");

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark and print the table");
    protocol::BenchConfig cfg;
    cfg.base_seed = default_seed(7);
    std::string be_model = "linreg", be_setting = "plain-plain", be_dataset;
    std::string be_csv_out, be_synth_kind = "linear";
    bench->add_option("--model", be_model, "linreg | knn | mlp")->required();
    bench->add_option("--setting", be_setting,
                      "enc-enc | plain-plain | plain-enc | enc-plain")
        ->required();
    bench
        ->add_option("--dataset", be_dataset,
                     "CSV path, or 'synthetic' for the generated dataset")
        ->required();
    bench->add_option("--target", cfg.target_column, "target column name (CSV)");
    bench->add_option("--key", cfg.key_file, "key file (defaults to a generated key)");
    bench->add_option("--repeats", cfg.repeats, "number of holdout repeats");
    bench->add_option("--seed", cfg.base_seed, "base seed (split r uses seed+r)");
    bench->add_option("--test-fraction", cfg.test_fraction, "holdout fraction");
    bench->add_option("--k", cfg.knn_k, "knn neighbor count");
    bench->add_option("--degree", cfg.degree, "regression monomial degree");
    bench->add_option("--hidden", cfg.hidden_units, "mlp hidden units");
    bench->add_option("--lr", cfg.learning_rate, "mlp learning rate");
    bench->add_option("--epochs", cfg.epochs, "mlp training epochs");
    bench->add_option("--synth-kind", be_synth_kind, "synthetic kind: linear | nonlinear");
    bench->add_option("--synth-n", cfg.synth_n, "synthetic sample count");
    bench->add_option("--synth-noise", cfg.synth_noise_sd, "synthetic noise sd");
    bench->add_option("--csv", be_csv_out, "also write a CSV row to this file");

    // train
    auto* train = app.add_subcommand("train", "fit a model and save it");
    std::string tr_model, tr_dataset, tr_target = "MEDV", tr_setting = "plain-plain";
    std::string tr_key, tr_out = "model.txt";
    std::uint64_t tr_seed = default_seed(7);
    std::size_t tr_degree = 1, tr_hidden = 16, tr_epochs = 500;
    double tr_lr = 0.02;
    train->add_option("--model", tr_model, "linreg | mlp")->required();
    train->add_option("--dataset", tr_dataset, "training CSV")->required();
    train->add_option("--target", tr_target, "target column name");
    train->add_option("--setting", tr_setting, "plain-plain or enc-enc (linreg only)");
    train->add_option("--key", tr_key, "key file for encrypted training");
    train->add_option("--seed", tr_seed, "seed");
    train->add_option("--degree", tr_degree, "regression monomial degree");
    train->add_option("--hidden", tr_hidden, "mlp hidden units");
    train->add_option("--lr", tr_lr, "mlp learning rate");
    train->add_option("--epochs", tr_epochs, "mlp training epochs");
    train->add_option("--out", tr_out, "output model file")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "predict with a saved regression model");
    std::string pr_model, pr_dataset, pr_target = "MEDV", pr_out;
    predict->add_option("--model-file", pr_model, "saved model file")->required();
    predict->add_option("--dataset", pr_dataset, "CSV with the same feature columns")
        ->required();
    predict->add_option("--target", pr_target, "target column name (ignored values)");
    predict->add_option("--out", pr_out, "output CSV (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*keygen) return run_keygen(kg_n, kg_seed, kg_eps, kg_out);
        if (*encrypt) return run_encrypt(en_key, en_value, en_out, en_text, en_seed);
        if (*bench) {
            cfg.model = protocol::parse_model(be_model);
            cfg.setting = protocol::parse_setting(be_setting);
            if (be_dataset != "synthetic") cfg.dataset_csv = be_dataset;
            if (be_synth_kind == "nonlinear")
                cfg.synth_kind = data::SyntheticKind::nonlinear;
            else if (be_synth_kind != "linear")
                throw std::invalid_argument("config error: unknown synthetic kind '" +
                                            be_synth_kind + "'");
            return run_bench(cfg, be_csv_out);
        }
        if (*train)
            return run_train(tr_model, tr_dataset, tr_target, tr_setting, tr_key, tr_seed,
                             tr_degree, tr_hidden, tr_lr, tr_epochs, tr_out);
        if (*predict) return run_predict(pr_model, pr_dataset, pr_target, pr_out);
    } catch (const std::exception& e) {
        std::cerr << "hepoly: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
