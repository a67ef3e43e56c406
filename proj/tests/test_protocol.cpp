#include <cmath>
#include <string>

#include "doctest.h"
#include "hepoly/protocol.hpp"

using namespace hepoly;

namespace {

protocol::TrustedParty make_tp() {
    ckks::SchemeParams params;
    return protocol::TrustedParty(params, ckks::keygen(params, 42), 7);
}

data::Dataset tiny_dataset() {
    data::Dataset ds;
    ds.feature_names = {"x"};
    ds.features = {{-1.0}, {-0.5}, {0.0}, {0.25}, {0.5}, {1.0}};
    ds.target = {-0.9, -0.4, 0.1, 0.3, 0.6, 0.9};
    return ds;
}

}  // namespace

TEST_SUITE_BEGIN("protocol");

TEST_CASE("trusted party encrypts datasets cell by cell") {
    auto tp = make_tp();
    const auto ds = tiny_dataset();
    const auto eds = tp.encrypt_dataset(ds);
    CHECK(eds.rows() == 6);
    CHECK(eds.cols() == 1);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(tp.decrypt_value(eds.features[i][0]) - ds.features[i][0]) < 1e-6);
        CHECK(std::abs(tp.decrypt_value(eds.target[i]) - ds.target[i]) < 1e-6);
    }
    CHECK_THROWS_AS(tp.encrypt_dataset(data::Dataset{}), std::invalid_argument);
}

TEST_CASE("decryption counter is monotone and counts per element") {
    auto tp = make_tp();
    CHECK(tp.decrypt_calls() == 0);
    std::vector<ckks::Ciphertext> cts;
    for (int i = 0; i < 5; ++i) cts.push_back(tp.encrypt_value(0.1 * i));
    const auto values = tp.decrypt_results(cts);
    CHECK(values.size() == 5);
    CHECK(tp.decrypt_calls() == 5);
    tp.decrypt_value(cts[0]);
    CHECK(tp.decrypt_calls() == 6);
    CHECK(tp.decrypt_results({}).empty());
    CHECK(tp.decrypt_calls() == 6);
}

TEST_CASE("ordering oracle returns indices and logs no values") {
    auto tp = make_tp();
    std::vector<ckks::Ciphertext> d = {tp.encrypt_value(9.0), tp.encrypt_value(1.0),
                                       tp.encrypt_value(4.0)};
    CHECK(tp.smallest_k(d, 2) == std::vector<std::size_t>{1, 2});
    CHECK(tp.smallest_k(d, 3) == std::vector<std::size_t>{1, 2, 0});  // full argsort

    const auto log = tp.oracle_log();
    REQUIRE(log.size() == 2);
    CHECK(log[0].list_length == 3);
    CHECK(log[0].k == 2);
    CHECK(log[1].k == 3);
    CHECK(tp.oracle_calls() == 2);
    // oracle-internal decryptions stay off the decryption counter
    CHECK(tp.decrypt_calls() == 0);
    CHECK_THROWS_AS(tp.smallest_k(d, 4), std::invalid_argument);
}

TEST_CASE("training server fits through the decryption interface only") {
    auto tp = make_tp();
    const auto ds = tiny_dataset();
    protocol::TrainingServer server(tp.encrypt_dataset(ds));

    const auto before = tp.decrypt_calls();
    const regression::FeatureMapSpec spec{1, true};
    data::ScalerParams scaler{{-1.0}, {1.0}, -1.0, 1.0};
    const auto model = server.fit_regression(spec, scaler, tp.encrypt_value(1.0), tp);
    CHECK(model.theta.size() == 2);
    CHECK(tp.decrypt_calls() - before == 2 * 2 + 2);  // p^2 + p

    const auto knn_model = server.fit_knn(3);
    CHECK(knn_model.encrypted);
    CHECK(knn_model.rows() == 6);
}

TEST_CASE("config matrix is enforced before any work") {
    protocol::BenchConfig cfg;
    cfg.repeats = 1;

    cfg.model = protocol::Model::knn;
    cfg.setting = protocol::Setting::plain_enc;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.setting = protocol::Setting::enc_plain;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.setting = protocol::Setting::enc_enc;
    CHECK_NOTHROW(cfg.validate());

    cfg.model = protocol::Model::mlp;
    cfg.setting = protocol::Setting::enc_enc;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.setting = protocol::Setting::enc_plain;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.setting = protocol::Setting::plain_enc;
    CHECK_NOTHROW(cfg.validate());

    cfg.model = protocol::Model::linreg;
    for (auto s : {protocol::Setting::enc_enc, protocol::Setting::plain_plain,
                   protocol::Setting::plain_enc, protocol::Setting::enc_plain}) {
        cfg.setting = s;
        CHECK_NOTHROW(cfg.validate());
    }

    cfg.repeats = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    // run_experiment rejects without touching the dataset
    protocol::BenchConfig bad;
    bad.model = protocol::Model::knn;
    bad.setting = protocol::Setting::plain_enc;
    bad.dataset_csv = "/nonexistent/never_read.csv";
    CHECK_THROWS_AS(protocol::run_experiment(bad), std::invalid_argument);
}

TEST_CASE("experiments are deterministic given the config") {
    protocol::BenchConfig cfg;
    cfg.model = protocol::Model::linreg;
    cfg.setting = protocol::Setting::enc_enc;
    cfg.repeats = 2;
    cfg.synth_n = 40;
    cfg.base_seed = 5;
    const auto a = protocol::run_experiment(cfg);
    const auto b = protocol::run_experiment(cfg);
    CHECK(a.mae_mean == b.mae_mean);
    CHECK(a.rmse_mean == b.rmse_mean);
    CHECK(a.r2_mean == b.r2_mean);
    CHECK(a.decrypt_calls == b.decrypt_calls);
    REQUIRE(a.per_repeat.size() == 2);

    // budget: p^2+p aggregates per fit plus one decryption per prediction.
    // n = 40, test fraction 0.2 -> 8 test rows; p = 2.
    CHECK(a.decrypt_calls == 2 * (2 * 2 + 2) + 2 * 8);
    CHECK(a.oracle_calls == 0);

    SUBCASE("single repeat reports zero std") {
        cfg.repeats = 1;
        const auto one = protocol::run_experiment(cfg);
        CHECK(one.mae_std == 0.0);
        CHECK(one.r2_std == 0.0);
    }
}

TEST_CASE("report formatting") {
    protocol::BenchConfig cfg;
    cfg.model = protocol::Model::linreg;
    cfg.setting = protocol::Setting::plain_plain;
    cfg.repeats = 2;
    cfg.synth_n = 40;
    const auto report = protocol::run_experiment(cfg);

    const std::string row = protocol::format_csv_row(report);
    CHECK(row.rfind("linreg,plain-plain,synthetic,2,", 0) == 0);
    CHECK(std::string(protocol::kCsvHeader).rfind("model,setting,", 0) == 0);

    const std::string table = protocol::format_table(report);
    CHECK(table.find("R^2") != std::string::npos);
    CHECK(table.find("decrypt calls") != std::string::npos);
}

TEST_SUITE_END();
