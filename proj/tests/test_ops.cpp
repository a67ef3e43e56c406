#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "hepoly/ckks.hpp"
#include "hepoly/ops.hpp"

using namespace hepoly;
using ckks::Complex;

namespace {

struct Fixture {
    ckks::SchemeParams params;
    ckks::SecretKey sk = ckks::keygen(params, 42);
    ckks::EncodingMap map = ckks::build_encoding_map(params, sk);
    std::mt19937_64 rng{2024};

    ckks::Ciphertext enc(double m) { return ckks::encrypt(map, m, params, rng); }
    double dec(const ckks::Ciphertext& ct) { return ckks::decrypt(map, ct); }
};

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-12);
}

// Horner evaluation; the reduction-exactness oracle.
Complex eval_poly(std::span<const Complex> coeffs, Complex x) {
    Complex acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
}

}  // namespace

TEST_SUITE_BEGIN("ops");

TEST_CASE("addition and subtraction decrypt to sums") {
    Fixture f;
    CHECK(rel_err(f.dec(ops::add(f.enc(5.0), f.enc(3.2))), 8.2) < 1e-6);
    CHECK(rel_err(f.dec(ops::add(f.enc(42.0), f.enc(42.0))), 84.0) < 1e-6);

    ckks::Ciphertext zero;
    zero.coeffs.assign(8, Complex(0, 0));
    CHECK(rel_err(f.dec(ops::add(f.enc(1.25), zero)), 1.25) < 1e-6);

    CHECK(rel_err(f.dec(ops::sub(f.enc(5.0), f.enc(3.2))), 1.8) < 1e-6);
    const auto m = f.enc(0.9);
    CHECK(std::abs(f.dec(ops::sub(m, m))) < 1e-12);

    // sub(a,b) == add(a, mul_const(b, -1)) coefficient for coefficient
    const auto a = f.enc(0.3), b = f.enc(-0.6);
    CHECK(ops::sub(a, b).coeffs == ops::add(a, ops::mul_const(b, -1.0)).coeffs);
}

TEST_CASE("constant addition shifts the message") {
    Fixture f;
    CHECK(rel_err(f.dec(ops::add_const(f.enc(1.0), 2.5)), 3.5) < 1e-6);
    const auto m = f.enc(-0.4);
    CHECK(ops::add_const(m, 0.0).coeffs == m.coeffs);
    CHECK(rel_err(f.dec(ops::add(ops::add_const(f.enc(1.0), 2.5), f.enc(1.0))), 4.5) <
          1e-6);
    CHECK_THROWS_AS(ops::add_const(m, std::nan("")), std::invalid_argument);
}

TEST_CASE("constant multiplication scales the message") {
    Fixture f;
    CHECK(rel_err(f.dec(ops::mul_const(f.enc(3.0), 1.0 / 3.0)), 1.0) < 1e-6);
    CHECK(std::abs(f.dec(ops::mul_const(f.enc(0.7), 0.0))) < 1e-12);
    CHECK(rel_err(f.dec(ops::mul_const(f.enc(2.0), -1.6)), -3.2) < 1e-6);
    auto ct = f.enc(0.5);
    ct.level = 3;
    CHECK(ops::mul_const(ct, 2.0).level == 3);
    CHECK_THROWS_AS(ops::mul_const(ct, INFINITY), std::invalid_argument);
}

TEST_CASE("negacyclic reduction folds with a sign flip") {
    SUBCASE("X^8 becomes -1 for N=8") {
        std::vector<Complex> p(9, Complex(0, 0));
        p[8] = 1.0;
        const auto r = ops::reduce_negacyclic(p, 8);
        CHECK(r[0] == Complex(-1, 0));
        for (std::size_t i = 1; i < 8; ++i) CHECK(r[i] == Complex(0, 0));
    }
    SUBCASE("low-degree input is unchanged") {
        std::vector<Complex> p = {{1, 0}, {2, 0}, {3, 0}};
        const auto r = ops::reduce_negacyclic(p, 8);
        CHECK(r[0] == Complex(1, 0));
        CHECK(r[1] == Complex(2, 0));
        CHECK(r[2] == Complex(3, 0));
    }
    SUBCASE("N=2 hand fold") {
        std::vector<Complex> p = {{1, 0}, {1, 0}, {1, 0}};  // 1 + X + X^2
        const auto r = ops::reduce_negacyclic(p, 2);
        CHECK(r[0] == Complex(0, 0));
        CHECK(r[1] == Complex(1, 0));  // = X
    }
    SUBCASE("input longer than 2N-1 is rejected") {
        std::vector<Complex> p(16, Complex(0, 0));
        CHECK_THROWS_AS(ops::reduce_negacyclic(p, 8), std::invalid_argument);
    }
}

TEST_CASE("reduction preserves evaluations at every root of X^N+1") {
    std::mt19937_64 rng(99);
    const std::size_t n = 8;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Complex> p(2 * n - 1);
        for (auto& c : p) c = Complex(ckks::uniform_pm1(rng), ckks::uniform_pm1(rng));
        const auto r = ops::reduce_negacyclic(p, n);
        for (std::size_t k = 0; k < n; ++k) {
            const Complex zeta = std::polar(
                1.0, 2.0 * std::numbers::pi * static_cast<double>(2 * k + 1) /
                         static_cast<double>(2 * n));
            CHECK(std::abs(eval_poly(p, zeta) - eval_poly(r, zeta)) < 1e-10);
        }
    }
}

TEST_CASE("ciphertext multiplication") {
    Fixture f;
    CHECK(rel_err(f.dec(ops::mul_ct(f.enc(5.5), f.enc(-3.2))), -17.6) < 1e-6);
    CHECK(std::abs(f.dec(ops::mul_ct(f.enc(0.8), f.enc(0.0)))) < 1e-9);

    const auto dx = ops::sub(f.enc(3.0), f.enc(1.0));
    CHECK(rel_err(f.dec(ops::mul_ct(dx, dx)), 4.0) < 1e-6);

    SUBCASE("level bookkeeping") {
        auto a = f.enc(0.5), b = f.enc(0.25);
        const auto ab = ops::mul_ct(a, b);
        CHECK(ab.level == 1);
        CHECK(ops::mul_ct(ab, ab).level == 3);
        CHECK(ops::add(ab, b).level == 1);
        CHECK(ops::sub(b, ab).level == 1);
        CHECK(ops::mul_const(ab, 2.0).level == 1);
    }
    SUBCASE("dimension mismatch") {
        ckks::Ciphertext small;
        small.coeffs.assign(4, Complex(0, 0));
        CHECK_THROWS_AS(ops::mul_ct(f.enc(1.0), small), std::invalid_argument);
        CHECK_THROWS_AS(ops::add(f.enc(1.0), small), std::invalid_argument);
    }
}

TEST_CASE("sums and encrypted dot products") {
    Fixture f;
    const std::vector<ckks::Ciphertext> cts = {f.enc(1.0), f.enc(2.0), f.enc(3.0)};
    CHECK(rel_err(f.dec(ops::sum_many(cts)), 6.0) < 1e-6);

    const std::vector<ckks::Ciphertext> one = {f.enc(0.77)};
    CHECK(ops::sum_many(one).coeffs == one[0].coeffs);
    CHECK_THROWS_AS(ops::sum_many(std::span<const ckks::Ciphertext>{}),
                    std::invalid_argument);

    std::vector<ckks::Ciphertext> pennies;
    for (int i = 0; i < 100; ++i) pennies.push_back(f.enc(0.01));
    CHECK(std::abs(f.dec(ops::sum_many(pennies)) - 1.0) < 1e-6);

    const std::vector<ckks::Ciphertext> as = {f.enc(1.0), f.enc(2.0)};
    const std::vector<ckks::Ciphertext> bs = {f.enc(3.0), f.enc(4.0)};
    CHECK(rel_err(f.dec(ops::dot_enc(as, bs)), 11.0) < 1e-6);

    const std::vector<ckks::Ciphertext> zs = {f.enc(0.0), f.enc(0.0)};
    CHECK(std::abs(f.dec(ops::dot_enc(as, zs))) < 1e-9);

    const std::vector<ckks::Ciphertext> a1 = {f.enc(0.5)};
    const std::vector<ckks::Ciphertext> b1 = {f.enc(-0.5)};
    CHECK(ops::dot_enc(a1, b1).coeffs == ops::mul_ct(a1[0], b1[0]).coeffs);
    CHECK_THROWS_AS(ops::dot_enc(as, a1), std::invalid_argument);
}

TEST_CASE("additive homomorphism over 1000 random pairs") {
    Fixture f;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double a = 10.0 * ckks::uniform_pm1(f.rng);
        const double b = 10.0 * ckks::uniform_pm1(f.rng);
        const double got = f.dec(ops::add(f.enc(a), f.enc(b)));
        worst = std::max(worst, std::abs(got - (a + b)) / std::max(1.0, std::abs(a + b)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("multiplicative error band at depth two") {
    Fixture f;
    std::vector<double> errs;
    for (int i = 0; i < 300; ++i) {
        const double a = ckks::uniform_pm1(f.rng);
        const double b = ckks::uniform_pm1(f.rng);
        const double c = ckks::uniform_pm1(f.rng);
        const double got = f.dec(ops::mul_ct(ops::mul_ct(f.enc(a), f.enc(b)), f.enc(c)));
        errs.push_back(rel_err(got, a * b * c));
    }
    std::sort(errs.begin(), errs.end());
    CHECK(errs.back() < 1e-6);
    CHECK(errs[errs.size() / 2] < 1e-9);  // median, typically far below
}

TEST_CASE("distributivity") {
    Fixture f;
    for (int i = 0; i < 50; ++i) {
        const double a = ckks::uniform_pm1(f.rng);
        const double b = ckks::uniform_pm1(f.rng);
        const double c = ckks::uniform_pm1(f.rng);
        const auto ea = f.enc(a), eb = f.enc(b), ec = f.enc(c);
        const double lhs = f.dec(ops::mul_ct(ea, ops::add(eb, ec)));
        const double rhs = f.dec(ops::add(ops::mul_ct(ea, eb), ops::mul_ct(ea, ec)));
        CHECK(std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)) < 1e-6);
    }
}

TEST_SUITE_END();
