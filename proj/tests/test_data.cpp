#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "hepoly/data.hpp"

using namespace hepoly;

namespace {

const std::filesystem::path kDataDir = HEPOLY_TEST_DATA_DIR;

std::filesystem::path write_temp_csv(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::trunc);
    out << body;
    return path;
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("synthetic generator") {
    const auto ds = data::generate_synthetic(500, data::SyntheticKind::linear, 0.005, 7);
    REQUIRE(ds.rows() == 500);
    CHECK(ds.cols() == 1);
    CHECK(ds.target_units.empty());
    for (const auto& row : ds.features) {
        CHECK(row[0] >= -1.0);
        CHECK(row[0] <= 1.0);
    }

    const auto again = data::generate_synthetic(500, data::SyntheticKind::linear, 0.005, 7);
    CHECK(ds.features == again.features);
    CHECK(ds.target == again.target);

    SUBCASE("noiseless linear data is collinear") {
        const auto line = data::generate_synthetic(50, data::SyntheticKind::linear, 0.0, 3);
        const double slope = (line.target[1] - line.target[0]) /
                             (line.features[1][0] - line.features[0][0]);
        for (std::size_t i = 2; i < line.rows(); ++i) {
            const double s = (line.target[i] - line.target[0]) /
                             (line.features[i][0] - line.features[0][0]);
            CHECK(std::abs(s - slope) < 1e-9);
        }
    }
    SUBCASE("nonlinear differs from linear") {
        const auto cubic =
            data::generate_synthetic(50, data::SyntheticKind::nonlinear, 0.0, 3);
        const auto lin = data::generate_synthetic(50, data::SyntheticKind::linear, 0.0, 3);
        CHECK(cubic.target != lin.target);
    }
    CHECK_THROWS_AS(data::generate_synthetic(1, data::SyntheticKind::linear, 0.0, 1),
                    std::invalid_argument);
}

TEST_CASE("housing csv loads with the expected shape") {
    const auto ds = data::load_csv(kDataDir / "housing.csv", "MEDV");
    CHECK(ds.rows() == 506);
    CHECK(ds.cols() == 13);
    CHECK(ds.feature_names.size() == 13);
    CHECK(ds.target_units == "10^3 USD");
    CHECK(ds.feature_names[0] == "CRIM");
    CHECK(ds.target[0] == doctest::Approx(24.0));
}

TEST_CASE("csv validation errors") {
    SUBCASE("bad cell names row and column") {
        const auto p = write_temp_csv("hepoly_bad_cell.csv", "a,b,y\n1,2,3\n4,oops,6\n");
        try {
            data::load_csv(p, "y");
            FAIL("expected error");
        } catch (const std::exception& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 3") != std::string::npos);
            CHECK(msg.find("'b'") != std::string::npos);
        }
        std::filesystem::remove(p);
    }
    SUBCASE("missing target column") {
        const auto p = write_temp_csv("hepoly_no_target.csv", "a,b\n1,2\n");
        try {
            data::load_csv(p, "y");
            FAIL("expected error");
        } catch (const std::exception& e) {
            CHECK(std::string(e.what()).find("'y'") != std::string::npos);
        }
        std::filesystem::remove(p);
    }
    SUBCASE("empty file") {
        const auto p = write_temp_csv("hepoly_empty.csv", "");
        CHECK_THROWS_AS(data::load_csv(p, "y"), std::runtime_error);
        std::filesystem::remove(p);
    }
}

TEST_CASE("scaler maps endpoints and inverts exactly") {
    data::Dataset ds;
    ds.feature_names = {"a"};
    ds.features = {{0.0}, {10.0}, {5.0}};
    ds.target = {2.0, 4.0, 3.0};
    const auto sp = data::fit_scaler(ds);
    const auto t = data::transform(ds, sp);
    CHECK(t.features[0][0] == doctest::Approx(-1.0));
    CHECK(t.features[1][0] == doctest::Approx(1.0));
    CHECK(t.features[2][0] == doctest::Approx(0.0));

    const auto back = data::inverse_transform_target(t.target, sp);
    for (std::size_t i = 0; i < ds.rows(); ++i)
        CHECK(std::abs(back[i] - ds.target[i]) < 1e-12);

    SUBCASE("roundtrip on random data") {
        std::mt19937_64 rng(11);
        data::Dataset r;
        r.feature_names = {"a", "b"};
        for (int i = 0; i < 200; ++i) {
            r.features.push_back({1e3 * ckks::uniform_pm1(rng), 1e-3 * ckks::uniform_pm1(rng)});
            r.target.push_back(400.0 + 50.0 * ckks::uniform_pm1(rng));
        }
        const auto rsp = data::fit_scaler(r);
        const auto rt = data::transform(r, rsp);
        const auto rb = data::inverse_transform_target(rt.target, rsp);
        for (std::size_t i = 0; i < r.rows(); ++i)
            CHECK(std::abs(rb[i] - r.target[i]) < 1e-12);
    }
    SUBCASE("constant column maps to zero") {
        data::Dataset c;
        c.feature_names = {"k"};
        c.features = {{4.0}, {4.0}, {4.0}};
        c.target = {1.0, 2.0, 3.0};
        const auto csp = data::fit_scaler(c);
        const auto ct = data::transform(c, csp);
        for (const auto& row : ct.features) CHECK(row[0] == 0.0);
    }
}

TEST_CASE("train/test split") {
    const auto s = data::train_test_split(10, 0.2, 1);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);

    const auto s506 = data::train_test_split(506, 0.2, 7);
    CHECK(s506.train.size() == 405);
    CHECK(s506.test.size() == 101);

    CHECK(data::train_test_split(10, 0.2, 1).train == s.train);
    CHECK_THROWS_AS(data::train_test_split(10, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(data::train_test_split(10, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(data::train_test_split(1, 0.5, 1), std::invalid_argument);

    SUBCASE("partition property over random cases") {
        std::mt19937_64 rng(21);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + rng() % 400;
            const auto sp = data::train_test_split(n, 0.25, rng());
            std::set<std::size_t> all(sp.train.begin(), sp.train.end());
            for (std::size_t i : sp.test) CHECK(all.insert(i).second);
            CHECK(all.size() == n);
            CHECK(*all.rbegin() == n - 1);
        }
    }
}

TEST_CASE("metrics") {
    const std::vector<double> y = {3.0, 5.0};
    const std::vector<double> p = {4.0, 4.0};
    const auto m = data::compute_metrics(y, p, "u");
    CHECK(m.mae == doctest::Approx(1.0));
    CHECK(m.rmse == doctest::Approx(1.0));
    CHECK(m.r2 == doctest::Approx(0.0));
    CHECK(m.units == "u");

    const auto perfect = data::compute_metrics(y, y, "");
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.r2 == doctest::Approx(1.0));

    const std::vector<double> mean_pred = {4.0, 4.0};
    CHECK(data::compute_metrics(y, mean_pred, "").r2 == doctest::Approx(0.0));

    SUBCASE("constant target flags undefined R^2") {
        const std::vector<double> c = {2.0, 2.0, 2.0};
        const std::vector<double> q = {1.0, 2.0, 3.0};
        const auto r = data::compute_metrics(c, q, "");
        CHECK_FALSE(r.r2_defined);
        CHECK(std::isnan(r.r2));
    }
    SUBCASE("length mismatch") {
        const std::vector<double> one = {1.0};
        CHECK_THROWS_AS(data::compute_metrics(y, one, ""), std::invalid_argument);
    }
    SUBCASE("matches a compensated-summation reference") {
        std::mt19937_64 rng(31);
        std::vector<double> yt, yp;
        for (int i = 0; i < 500; ++i) {
            yt.push_back(100.0 * ckks::uniform_pm1(rng));
            yp.push_back(yt.back() + ckks::uniform_pm1(rng));
        }
        long double abs_sum = 0, sq_sum = 0, mean = 0;
        for (double v : yt) mean += v;
        mean /= yt.size();
        long double ss_tot = 0;
        for (std::size_t i = 0; i < yt.size(); ++i) {
            const long double e = static_cast<long double>(yp[i]) - yt[i];
            abs_sum += std::abs((double)e);
            sq_sum += e * e;
            ss_tot += (yt[i] - mean) * (yt[i] - mean);
        }
        const auto got = data::compute_metrics(yt, yp, "");
        CHECK(std::abs(got.mae - (double)(abs_sum / yt.size())) < 1e-10);
        CHECK(std::abs(got.rmse - std::sqrt((double)(sq_sum / yt.size()))) < 1e-10);
        CHECK(std::abs(got.r2 - (double)(1.0L - sq_sum / ss_tot)) < 1e-10);
    }
}

TEST_SUITE_END();
