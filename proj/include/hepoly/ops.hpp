/**
 * @file ops.hpp
 * @brief Homomorphic arithmetic on ciphertext polynomials.
 *
 * All operations are coefficient-level polynomial arithmetic mod X^N + 1.
 * Because the encoding evaluates at roots of X^N + 1, every operation acts
 * slot-wise on the embedded values: addition adds messages, multiplication
 * multiplies them. Multiplication uses schoolbook convolution followed by
 * exact negacyclic reduction; at the demonstration scale N = 8 an FFT would
 * not pay for itself (swap to one if N grows past a few hundred).
 *
 * @license Apache-2.0
 */

#ifndef HEPOLY_OPS_HPP
#define HEPOLY_OPS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "hepoly/ckks.hpp"

namespace hepoly::ops {

using ckks::Ciphertext;
using ckks::Complex;

/// Raw convolution result before reduction, degree up to 2N-2. Exists only
/// transiently inside multiplication.
using ProductPolynomial = std::vector<Complex>;

/// Coefficient-wise sum; level = max of inputs. Decrypts to m_a + m_b.
Ciphertext add(const Ciphertext& ca, const Ciphertext& cb);

/// Coefficient-wise difference. Decrypts to m_a - m_b.
Ciphertext sub(const Ciphertext& ca, const Ciphertext& cb);

/// Adds the constant polynomial alpha (coefficient 0 shifts by alpha, so
/// every slot, including the noise slots, shifts by alpha). Decrypts to
/// m + alpha.
Ciphertext add_const(const Ciphertext& ct, double alpha);

/// Scales every coefficient by alpha; level unchanged. Decrypts to
/// alpha * m. This is what averaging by 1/n and applying plaintext model
/// weights reduce to.
Ciphertext mul_const(const Ciphertext& ct, double alpha);

/// Folds coefficient j+N into coefficient j with a sign flip (X^N = -1).
/// Exact at every root of X^N + 1. Input length at most 2N-1.
std::vector<Complex> reduce_negacyclic(std::span<const Complex> product, std::size_t n);

/// Ciphertext-ciphertext product: schoolbook convolution reduced mod
/// X^N + 1. level = level(a) + level(b) + 1.
Ciphertext mul_ct(const Ciphertext& ca, const Ciphertext& cb);

/// Fold of add over a non-empty list.
Ciphertext sum_many(std::span<const Ciphertext> cts);

/// Encrypted dot product: sum of pairwise mul_ct.
Ciphertext dot_enc(std::span<const Ciphertext> as, std::span<const Ciphertext> bs);

/// Running count of mul_ct invocations (diagnostic; used by complexity
/// assertions in tests).
std::uint64_t mul_count();
void reset_mul_count();

}  // namespace hepoly::ops

#endif  // HEPOLY_OPS_HPP
