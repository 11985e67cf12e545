#pragma once

#include <charconv>
#include <complex>
#include <cstdlib>
#include <string>
#include <system_error>

namespace cubepf {

// Locale-independent shortest-round-trip decimal form (17 significant digits
// cover every double exactly; std::to_chars emits the shortest such string).
inline std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, p);
}

inline std::string format_complex(std::complex<double> z) {
    return format_double(z.real()) + " " + format_double(z.imag());
}

// Locale-independent double parse of a whole token; false on trailing junk.
inline bool parse_double(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    const char* b = tok.data();
    const char* e = b + tok.size();
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || p != e) {
        // from_chars rejects forms like "1e+3" with explicit '+'? It accepts
        // them; what it rejects is leading '+'. Allow that common spelling.
        if (tok[0] == '+') {
            std::string t = tok.substr(1);
            return !t.empty() && t[0] != '+' && parse_double(t, out);
        }
        return false;
    }
    return true;
}

inline bool parse_int(const std::string& tok, long long& out) {
    if (tok.empty()) return false;
    const char* b = tok.data();
    const char* e = b + tok.size();
    if (tok[0] == '+') ++b;
    if (b == e) return false;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e;
}

}  // namespace cubepf
