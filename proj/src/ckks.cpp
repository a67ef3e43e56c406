/**
 * @file ckks.cpp
 * @brief Key generation, encoding map construction, encryption, persistence.
 * @license Apache-2.0
 */

#include "hepoly/ckks.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hepoly/detail/textio.hpp"

namespace hepoly::ckks {

namespace {

using detail::fmt_double;
using detail::format_complex_array;
using detail::parse_complex_array;
using detail::parse_double;
using detail::parse_u64;

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

void store_le_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t load_le_u32(std::span<const std::uint8_t> buf, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[off + i]) << (8 * i);
    return v;
}

void store_le_f64(std::vector<std::uint8_t>& buf, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double load_le_f64(std::span<const std::uint8_t> buf, std::size_t off) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[off + i]) << (8 * i);
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
}

constexpr char kMagic[4] = {'H', 'E', 'P', 'C'};

}  // namespace

void SchemeParams::validate() const {
    if (ring_dim_m % 2 != 0)
        throw std::invalid_argument("scheme params: ring_dim_m must be even");
    if (poly_degree_n < 2)
        throw std::invalid_argument("scheme params: poly_degree_n must be >= 2");
    if (!is_power_of_two(poly_degree_n))
        throw std::invalid_argument("scheme params: poly_degree_n must be a power of two");
    if (ring_dim_m != 2 * poly_degree_n)
        throw std::invalid_argument("scheme params: ring_dim_m must equal 2 * poly_degree_n");
    if (!(noise_epsilon >= 0.0))
        throw std::invalid_argument("scheme params: noise_epsilon must be >= 0");
}

SchemeParams SchemeParams::for_degree(std::size_t n) {
    SchemeParams p;
    p.poly_degree_n = n;
    p.ring_dim_m = 2 * n;
    p.validate();
    return p;
}

double uniform_pm1(std::mt19937_64& rng) {
    // 53 random bits -> [0,1) -> [-1,1).
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

SecretKey keygen(const SchemeParams& params, std::uint64_t seed) {
    params.validate();
    const std::size_t n = params.poly_degree_n;
    std::mt19937_64 rng(seed);
    SecretKey sk;
    sk.seed = seed;
    sk.key_vector.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex z;
        do {
            z = Complex(uniform_pm1(rng), uniform_pm1(rng));
        } while (z == Complex(0.0, 0.0));
        sk.key_vector.push_back(z);
    }
    sk.slot_permutation = derive_slot_permutation(sk.key_vector);
    return sk;
}

std::vector<std::size_t> derive_slot_permutation(std::span<const Complex> key_vector) {
    std::vector<std::size_t> idx(key_vector.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::arg(key_vector[a]) < std::arg(key_vector[b]);
    });
    return idx;
}

EncodingMap EncodingMap::from_permutation(const SchemeParams& params,
                                          std::span<const std::size_t> perm) {
    params.validate();
    const std::size_t n = params.poly_degree_n;
    const std::size_t m = params.ring_dim_m;
    if (perm.size() != n)
        throw std::invalid_argument("encoding map: permutation length must equal N");
    std::vector<Complex> mat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        // zeta = xi^{2*perm[i]+1}, a primitive 2N-th root of unity with
        // zeta^N = -1.
        const double base = 2.0 * std::numbers::pi * static_cast<double>(2 * perm[i] + 1) /
                            static_cast<double>(m);
        for (std::size_t j = 0; j < n; ++j)
            mat[i * n + j] = std::polar(1.0, base * static_cast<double>(j));
    }
    return EncodingMap(n, std::move(mat));
}

EncodingMap build_encoding_map(const SchemeParams& params, const SecretKey& sk) {
    if (sk.key_vector.size() != params.poly_degree_n)
        throw std::invalid_argument("encoding map: key vector length does not match N");
    return EncodingMap::from_permutation(params, sk.slot_permutation);
}

std::vector<Complex> EncodingMap::to_slots(std::span<const Complex> coeffs) const {
    if (coeffs.size() != n_)
        throw std::invalid_argument("encoding map: coefficient vector length does not match N");
    std::vector<Complex> slots(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        Complex acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) acc += m_[i * n_ + j] * coeffs[j];
        slots[i] = acc;
    }
    return slots;
}

std::vector<Complex> EncodingMap::to_coeffs(std::span<const Complex> slots) const {
    if (slots.size() != n_)
        throw std::invalid_argument("encoding map: slot vector length does not match N");
    const double inv_n = 1.0 / static_cast<double>(n_);
    std::vector<Complex> coeffs(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        Complex acc = 0.0;
        for (std::size_t i = 0; i < n_; ++i) acc += std::conj(m_[i * n_ + j]) * slots[i];
        coeffs[j] = acc * inv_n;
    }
    return coeffs;
}

Complex EncodingMap::slot0(std::span<const Complex> coeffs) const {
    if (coeffs.size() != n_)
        throw std::invalid_argument("encoding map: ciphertext length does not match N");
    Complex acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += m_[j] * coeffs[j];
    return acc;
}

SlotVector make_message_slots(double m, const SchemeParams& params, std::mt19937_64& rng) {
    if (!std::isfinite(m)) throw std::invalid_argument("encrypt: message must be finite");
    SlotVector sv;
    sv.slots.assign(params.poly_degree_n, Complex(0.0, 0.0));
    sv.slots[0] = Complex(m, 0.0);
    const bool with_noise = !params.deterministic_mode && params.noise_epsilon > 0.0;
    if (with_noise) {
        for (std::size_t i = 1; i < sv.slots.size(); ++i)
            sv.slots[i] = Complex(params.noise_epsilon * uniform_pm1(rng),
                                  params.noise_epsilon * uniform_pm1(rng));
    }
    return sv;
}

Ciphertext encrypt(const EncodingMap& map, double m, const SchemeParams& params,
                   std::mt19937_64& rng) {
    if (map.degree() != params.poly_degree_n)
        throw std::invalid_argument("encrypt: encoding map does not match params");
    const SlotVector sv = make_message_slots(m, params, rng);
    Ciphertext ct;
    ct.coeffs = map.to_coeffs(sv.slots);
    ct.level = 0;
    return ct;
}

double decrypt(const EncodingMap& map, const Ciphertext& ct) {
    const Complex s0 = map.slot0(ct.coeffs);
    if (std::abs(s0.imag()) > 1e-4)
        std::cerr << "hepoly: decrypt: imaginary residual " << s0.imag() << "\n";
    return s0.real();
}

void save_key(const SecretKey& sk, const SchemeParams& params,
              const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("persistence error: cannot open key file for writing: " +
                                 path.string());
    out << "version=1\n";
    out << "M=" << params.ring_dim_m << "\n";
    out << "N=" << params.poly_degree_n << "\n";
    out << "noise_epsilon=" << fmt_double(params.noise_epsilon) << "\n";
    out << "seed=" << sk.seed << "\n";
    out << "key_vector=" << format_complex_array(sk.key_vector) << "\n";
    if (!out)
        throw std::runtime_error("persistence error: write failed: " + path.string());
}

KeyFile load_key(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("persistence error: cannot open key file: " + path.string());
    std::string line;
    std::uint64_t version = 0, m = 0, n = 0, seed = 0;
    double noise_epsilon = -1.0;
    std::vector<Complex> key_vector;
    bool have_version = false, have_m = false, have_n = false, have_seed = false,
         have_eps = false, have_key = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("persistence error: malformed line in key file: " + line);
        const std::string field = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (field == "version") {
            version = parse_u64(value, field);
            have_version = true;
        } else if (field == "M") {
            m = parse_u64(value, field);
            have_m = true;
        } else if (field == "N") {
            n = parse_u64(value, field);
            have_n = true;
        } else if (field == "noise_epsilon") {
            noise_epsilon = parse_double(value, field);
            have_eps = true;
        } else if (field == "seed") {
            seed = parse_u64(value, field);
            have_seed = true;
        } else if (field == "key_vector") {
            key_vector = parse_complex_array(value, field);
            have_key = true;
        } else {
            throw std::runtime_error("persistence error: unknown field '" + field +
                                     "' in key file");
        }
    }
    if (!have_version) throw std::runtime_error("persistence error: missing field 'version'");
    if (version != 1)
        throw std::runtime_error("persistence error: unsupported value for field 'version'");
    if (!have_m) throw std::runtime_error("persistence error: missing field 'M'");
    if (!have_n) throw std::runtime_error("persistence error: missing field 'N'");
    if (!have_eps)
        throw std::runtime_error("persistence error: missing field 'noise_epsilon'");
    if (!have_seed) throw std::runtime_error("persistence error: missing field 'seed'");
    if (!have_key) throw std::runtime_error("persistence error: missing field 'key_vector'");

    KeyFile kf;
    kf.params.ring_dim_m = m;
    kf.params.poly_degree_n = n;
    kf.params.noise_epsilon = noise_epsilon;
    kf.params.validate();
    if (key_vector.size() != n)
        throw std::runtime_error("persistence error: field 'key_vector' has length " +
                                 std::to_string(key_vector.size()) + ", expected N = " +
                                 std::to_string(n));
    kf.sk.seed = seed;
    kf.sk.key_vector = std::move(key_vector);
    kf.sk.slot_permutation = derive_slot_permutation(kf.sk.key_vector);
    return kf;
}

std::vector<std::uint8_t> serialize_ct(const Ciphertext& ct) {
    std::vector<std::uint8_t> buf;
    buf.reserve(16 + 16 * ct.coeffs.size());
    buf.insert(buf.end(), kMagic, kMagic + 4);
    store_le_u32(buf, static_cast<std::uint32_t>(ct.coeffs.size()));
    store_le_u32(buf, ct.level);
    store_le_u32(buf, 0);  // reserved
    for (const Complex& c : ct.coeffs) {
        store_le_f64(buf, c.real());
        store_le_f64(buf, c.imag());
    }
    return buf;
}

Ciphertext deserialize_ct(std::span<const std::uint8_t> record) {
    if (record.size() < 16)
        throw std::runtime_error("persistence error: ciphertext record truncated (header)");
    if (std::memcmp(record.data(), kMagic, 4) != 0)
        throw std::runtime_error("persistence error: ciphertext record has bad magic");
    const std::uint32_t n = load_le_u32(record, 4);
    const std::uint32_t level = load_le_u32(record, 8);
    const std::size_t expected = 16 + 16 * static_cast<std::size_t>(n);
    if (record.size() != expected)
        throw std::runtime_error("persistence error: ciphertext record has " +
                                 std::to_string((record.size() - 16) / 16) +
                                 " coefficient pairs, expected N = " + std::to_string(n));
    Ciphertext ct;
    ct.level = level;
    ct.coeffs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i)
        ct.coeffs.emplace_back(load_le_f64(record, 16 + 16 * i),
                               load_le_f64(record, 16 + 16 * i + 8));
    return ct;
}

std::string serialize_ct_text(const Ciphertext& ct) {
    std::ostringstream out;
    out << "N=" << ct.coeffs.size() << " level=" << ct.level
        << " coeffs=" << format_complex_array(ct.coeffs);
    return out.str();
}

Ciphertext deserialize_ct_text(const std::string& record) {
    std::istringstream in(record);
    std::string tok;
    std::uint64_t n = 0, level = 0;
    std::vector<Complex> coeffs;
    bool have_n = false, have_level = false, have_coeffs = false;
    while (in >> tok) {
        const std::size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("persistence error: malformed ciphertext record token: " +
                                     tok);
        const std::string field = tok.substr(0, eq);
        const std::string value = tok.substr(eq + 1);
        if (field == "N") {
            n = parse_u64(value, field);
            have_n = true;
        } else if (field == "level") {
            level = parse_u64(value, field);
            have_level = true;
        } else if (field == "coeffs") {
            coeffs = parse_complex_array(value, field);
            have_coeffs = true;
        } else {
            throw std::runtime_error("persistence error: unknown field '" + field +
                                     "' in ciphertext record");
        }
    }
    if (!have_n || !have_level || !have_coeffs)
        throw std::runtime_error("persistence error: ciphertext record missing fields");
    if (coeffs.size() != n)
        throw std::runtime_error("persistence error: field 'coeffs' has " +
                                 std::to_string(coeffs.size()) + " pairs, expected N = " +
                                 std::to_string(n));
    Ciphertext ct;
    ct.level = static_cast<std::uint32_t>(level);
    ct.coeffs = std::move(coeffs);
    return ct;
}

}  // namespace hepoly::ckks
