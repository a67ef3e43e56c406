/**
 * @file ckks.hpp
 * @brief Simplified CKKS-style scheme: parameters, keys, encoding, encryption.
 *
 * Messages are real scalars carried in slot 0 of a complex slot vector; the
 * remaining slots hold masking noise. The encoding map sigma evaluates a
 * degree-(N-1) polynomial at N secret-permuted primitive 2N-th roots of
 * unity, all of which are roots of X^N + 1, so ciphertext arithmetic in the
 * negacyclic ring acts slot-wise on the embedded values.
 *
 * This is a pedagogical scheme with floating-point coefficients and no
 * RLWE hardness. The default N = 8 is far below the N >= 2^14 needed for
 * real security; do not use it to protect actual data.
 *
 * @license Apache-2.0
 */

#ifndef HEPOLY_CKKS_HPP
#define HEPOLY_CKKS_HPP

#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hepoly::ckks {

using Complex = std::complex<double>;

/// Scheme parameters. Defaults give the demonstration-scale ring M=16, N=8.
struct SchemeParams {
    std::size_t ring_dim_m = 16;    ///< cyclotomic index M, always 2N
    std::size_t poly_degree_n = 8;  ///< polynomial degree N, a power of two
    double noise_epsilon = 1e-6;    ///< magnitude bound of slot-masking noise
    bool deterministic_mode = false;  ///< disables noise entirely

    /// Throws std::invalid_argument unless M = 2N, N >= 2, N a power of two,
    /// and noise_epsilon >= 0.
    void validate() const;

    /// Convenience constructor from the polynomial degree (M is derived).
    static SchemeParams for_degree(std::size_t n);
};

/// Secret key: the length-N complex key vector and the slot permutation it
/// induces. The permutation is a pure function of key_vector, so it is never
/// persisted.
struct SecretKey {
    std::uint64_t seed = 0;
    std::vector<Complex> key_vector;
    std::vector<std::size_t> slot_permutation;
};

/// Ciphertext: coefficients of a polynomial mod X^N + 1, constant term
/// first. `level` counts ciphertext-ciphertext multiplications (diagnostic).
struct Ciphertext {
    std::vector<Complex> coeffs;
    std::uint32_t level = 0;

    std::size_t size() const { return coeffs.size(); }
};

/// Slot-domain view of a message: slot 0 carries it, slots 1..N-1 carry
/// masking noise.
struct SlotVector {
    std::vector<Complex> slots;
};

/// The N x N evaluation matrix sigma with rows ordered by the secret slot
/// permutation: matrix[i][j] = zeta_{perm[i]}^j where zeta_k = xi^{2k+1} and
/// xi = e^{2*pi*i/M}. Rows are mutually orthogonal with squared norm N, so
/// the inverse is the conjugate transpose divided by N.
class EncodingMap {
public:
    static EncodingMap from_permutation(const SchemeParams& params,
                                        std::span<const std::size_t> perm);

    std::size_t degree() const { return n_; }
    Complex at(std::size_t row, std::size_t col) const { return m_[row * n_ + col]; }

    /// sigma: polynomial coefficients -> slot values.
    std::vector<Complex> to_slots(std::span<const Complex> coeffs) const;

    /// sigma^{-1} = sigma^H / N: slot values -> polynomial coefficients.
    std::vector<Complex> to_coeffs(std::span<const Complex> slots) const;

    /// Row 0 of sigma applied to coeffs: the decryption slot.
    Complex slot0(std::span<const Complex> coeffs) const;

private:
    EncodingMap(std::size_t n, std::vector<Complex> m) : n_(n), m_(std::move(m)) {}
    std::size_t n_ = 0;
    std::vector<Complex> m_;
};

/// Generates a secret key with components uniform in [-1, 1], reproducible
/// per seed, and derives the slot permutation (key entries ordered by
/// complex argument, ties by index).
SecretKey keygen(const SchemeParams& params, std::uint64_t seed);

/// Recomputes the slot permutation from the key vector alone.
std::vector<std::size_t> derive_slot_permutation(std::span<const Complex> key_vector);

/// Builds sigma from the secret key's slot permutation.
EncodingMap build_encoding_map(const SchemeParams& params, const SecretKey& sk);

/// Embeds a message: slot 0 = m, slots 1..N-1 = complex noise with
/// components uniform in [-noise_epsilon, noise_epsilon] (zero in
/// deterministic mode). The rng is only consumed when noise is drawn.
SlotVector make_message_slots(double m, const SchemeParams& params, std::mt19937_64& rng);

/// Encrypts a real scalar: embeds it into a slot vector and maps the slots
/// to polynomial coefficients. Level starts at 0.
Ciphertext encrypt(const EncodingMap& map, double m, const SchemeParams& params,
                   std::mt19937_64& rng);

/// Recovers the message as the real part of slot 0. An imaginary residual
/// above 1e-4 is reported to stderr as a diagnostic.
double decrypt(const EncodingMap& map, const Ciphertext& ct);

/// Key persistence. Text key-value format; doubles round-trip bit-exactly.
void save_key(const SecretKey& sk, const SchemeParams& params,
              const std::filesystem::path& path);

struct KeyFile {
    SecretKey sk;
    SchemeParams params;
};
KeyFile load_key(const std::filesystem::path& path);

/// Ciphertext records. The binary form is a 16-byte header (magic "HEPC",
/// u32 N, u32 level, u32 reserved) followed by N interleaved re/im pairs as
/// little-endian 64-bit floats. The text form carries the same fields.
std::vector<std::uint8_t> serialize_ct(const Ciphertext& ct);
Ciphertext deserialize_ct(std::span<const std::uint8_t> record);
std::string serialize_ct_text(const Ciphertext& ct);
Ciphertext deserialize_ct_text(const std::string& record);

/// Uniform double in [-1, 1] built from raw mt19937_64 output, so streams
/// are identical across standard libraries.
double uniform_pm1(std::mt19937_64& rng);

}  // namespace hepoly::ckks

#endif  // HEPOLY_CKKS_HPP
