/**
 * @file textio.hpp
 * @brief Locale-independent text helpers shared by the file formats.
 * @license Apache-2.0
 */

#ifndef HEPOLY_DETAIL_TEXTIO_HPP
#define HEPOLY_DETAIL_TEXTIO_HPP

#include <charconv>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hepoly::detail {

// Shortest round-trip formatting; doubles survive save/load bit-exactly.
inline std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, const std::string& field) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error("persistence error: malformed value for field '" + field +
                                 "'");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, const std::string& field) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error("persistence error: malformed value for field '" + field +
                                 "'");
    return v;
}

inline std::string format_double_array(std::span<const double> vals) {
    std::string out = "[";
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(vals[i]);
    }
    out += ']';
    return out;
}

inline std::vector<double> parse_double_array(std::string_view s, const std::string& field) {
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw std::runtime_error("persistence error: malformed value for field '" + field +
                                 "'");
    std::vector<double> out;
    std::string_view body = s.substr(1, s.size() - 2);
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t comma = body.find(',', pos);
        if (comma == std::string_view::npos) comma = body.size();
        out.push_back(parse_double(body.substr(pos, comma - pos), field));
        pos = comma + 1;
    }
    return out;
}

inline std::string format_complex_array(std::span<const std::complex<double>> vals) {
    std::string out = "[";
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) out += ',';
        out += '[';
        out += fmt_double(vals[i].real());
        out += ',';
        out += fmt_double(vals[i].imag());
        out += ']';
    }
    out += ']';
    return out;
}

inline std::vector<std::complex<double>> parse_complex_array(std::string_view s,
                                                             const std::string& field) {
    auto fail = [&]() -> std::vector<std::complex<double>> {
        throw std::runtime_error("persistence error: malformed value for field '" + field +
                                 "'");
    };
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') return fail();
    std::vector<std::complex<double>> out;
    std::string_view body = s.substr(1, s.size() - 2);
    std::size_t pos = 0;
    while (pos < body.size()) {
        if (body[pos] == ',') ++pos;
        if (pos >= body.size() || body[pos] != '[') return fail();
        const std::size_t close = body.find(']', pos);
        if (close == std::string_view::npos) return fail();
        std::string_view pair = body.substr(pos + 1, close - pos - 1);
        const std::size_t comma = pair.find(',');
        if (comma == std::string_view::npos) return fail();
        out.emplace_back(parse_double(pair.substr(0, comma), field),
                         parse_double(pair.substr(comma + 1), field));
        pos = close + 1;
    }
    return out;
}

}  // namespace hepoly::detail

#endif  // HEPOLY_DETAIL_TEXTIO_HPP
