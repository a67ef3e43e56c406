/**
 * @file ops.cpp
 * @license Apache-2.0
 */

#include "hepoly/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace hepoly::ops {

namespace {

std::atomic<std::uint64_t> g_mul_count{0};

void check_same_degree(const Ciphertext& a, const Ciphertext& b) {
    if (a.coeffs.size() != b.coeffs.size())
        throw std::invalid_argument("he op: ciphertext dimension mismatch");
}

void check_finite_const(double alpha) {
    if (!std::isfinite(alpha))
        throw std::invalid_argument("he op: constant must be finite");
}

}  // namespace

Ciphertext add(const Ciphertext& ca, const Ciphertext& cb) {
    check_same_degree(ca, cb);
    Ciphertext out;
    out.coeffs.resize(ca.coeffs.size());
    for (std::size_t i = 0; i < ca.coeffs.size(); ++i)
        out.coeffs[i] = ca.coeffs[i] + cb.coeffs[i];
    out.level = std::max(ca.level, cb.level);
    return out;
}

Ciphertext sub(const Ciphertext& ca, const Ciphertext& cb) {
    check_same_degree(ca, cb);
    Ciphertext out;
    out.coeffs.resize(ca.coeffs.size());
    for (std::size_t i = 0; i < ca.coeffs.size(); ++i)
        out.coeffs[i] = ca.coeffs[i] - cb.coeffs[i];
    out.level = std::max(ca.level, cb.level);
    return out;
}

Ciphertext add_const(const Ciphertext& ct, double alpha) {
    check_finite_const(alpha);
    Ciphertext out = ct;
    out.coeffs[0] += alpha;
    return out;
}

Ciphertext mul_const(const Ciphertext& ct, double alpha) {
    check_finite_const(alpha);
    Ciphertext out = ct;
    for (Complex& c : out.coeffs) c *= alpha;
    return out;
}

std::vector<Complex> reduce_negacyclic(std::span<const Complex> product, std::size_t n) {
    if (product.size() > 2 * n - 1)
        throw std::invalid_argument("reduce_negacyclic: product degree exceeds 2N-2");
    std::vector<Complex> out(n, Complex(0.0, 0.0));
    for (std::size_t j = 0; j < product.size(); ++j) {
        if (j < n)
            out[j] += product[j];
        else
            out[j - n] -= product[j];  // X^N = -1
    }
    return out;
}

Ciphertext mul_ct(const Ciphertext& ca, const Ciphertext& cb) {
    check_same_degree(ca, cb);
    const std::size_t n = ca.coeffs.size();
    ProductPolynomial prod(2 * n - 1, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) prod[i + j] += ca.coeffs[i] * cb.coeffs[j];
    Ciphertext out;
    out.coeffs = reduce_negacyclic(prod, n);
    out.level = ca.level + cb.level + 1;
    g_mul_count.fetch_add(1, std::memory_order_relaxed);
    return out;
}

Ciphertext sum_many(std::span<const Ciphertext> cts) {
    if (cts.empty()) throw std::invalid_argument("sum_many: empty ciphertext list");
    Ciphertext acc = cts[0];
    for (std::size_t i = 1; i < cts.size(); ++i) acc = add(acc, cts[i]);
    return acc;
}

Ciphertext dot_enc(std::span<const Ciphertext> as, std::span<const Ciphertext> bs) {
    if (as.empty()) throw std::invalid_argument("dot_enc: empty operand lists");
    if (as.size() != bs.size()) throw std::invalid_argument("dot_enc: length mismatch");
    Ciphertext acc = mul_ct(as[0], bs[0]);
    for (std::size_t i = 1; i < as.size(); ++i) acc = add(acc, mul_ct(as[i], bs[i]));
    return acc;
}

std::uint64_t mul_count() { return g_mul_count.load(std::memory_order_relaxed); }

void reset_mul_count() { g_mul_count.store(0, std::memory_order_relaxed); }

}  // namespace hepoly::ops
