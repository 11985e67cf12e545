#pragma once

#include <complex>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "polynomial.hpp"

namespace cubepf {

// Text format, one term per line:
//
//     # comment
//     n = 12
//     1.5 0 : 1 2 7      <- re im : 1-based indices (empty list = constant)
//     0 -2 :
//
// '#' starts a comment anywhere on a line; blank lines are skipped. Duplicate
// supports across lines merge additively (canonicalization drops exact zeros);
// duplicate indices within one line are an error.

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::string cur;
    for (char c : line) {
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r') {
            if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) toks.push_back(std::move(cur));
    return toks;
}

// Accepts "n = 5", "n= 5", "n=5"; returns false if the tokens are not a
// header at all (so the caller can report a better error).
inline bool parse_header(const std::vector<std::string>& toks, long long& n_out) {
    std::string joined;
    for (const std::string& t : toks) joined += t;
    if (joined.size() < 3 || joined[0] != 'n' || joined[1] != '=') return false;
    return parse_int(joined.substr(2), n_out);
}

}  // namespace detail

inline CubePolynomial parse_polynomial(std::istream& in) {
    std::string line;
    int lineno = 0;
    long long n = -1;

    // header
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = detail::tokenize(line);
        if (toks.empty()) continue;
        if (!detail::parse_header(toks, n))
            throw parse_error(lineno, "expected header 'n = <count>', got '" + line + "'");
        if (n < 0 || n > 1000000)
            throw parse_error(lineno, "variable count out of range: " + std::to_string(n));
        break;
    }
    if (n < 0) throw parse_error(lineno ? lineno : 1, "missing header 'n = <count>'");

    std::vector<Term> terms;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = detail::tokenize(line);
        if (toks.empty()) continue;

        // find ':' — may be glued to a neighboring token
        std::vector<std::string> split;
        std::size_t colon = static_cast<std::size_t>(-1);
        for (std::string& t : toks) {
            auto pos = t.find(':');
            if (pos == std::string::npos) {
                split.push_back(std::move(t));
                continue;
            }
            if (t.find(':', pos + 1) != std::string::npos || colon != static_cast<std::size_t>(-1))
                throw parse_error(lineno, "multiple ':' separators in term line");
            if (pos > 0) split.push_back(t.substr(0, pos));
            colon = split.size();
            split.push_back(":");
            if (pos + 1 < t.size()) split.push_back(t.substr(pos + 1));
        }
        if (colon == static_cast<std::size_t>(-1))
            throw parse_error(lineno, "term line is missing the ':' separator");
        if (colon != 2)
            throw parse_error(lineno, "expected '<re> <im> :' before the index list");

        double re = 0.0, im = 0.0;
        if (!parse_double(split[0], re))
            throw parse_error(lineno, "bad real part '" + split[0] + "'");
        if (!parse_double(split[1], im))
            throw parse_error(lineno, "bad imaginary part '" + split[1] + "'");

        std::vector<int> idx;
        for (std::size_t k = colon + 1; k < split.size(); ++k) {
            long long v;
            if (!parse_int(split[k], v))
                throw parse_error(lineno, "bad variable index '" + split[k] + "'");
            if (v < 1 || v > n)
                throw parse_error(lineno, "variable index " + std::to_string(v) +
                                              " out of range [1," + std::to_string(n) + "]");
            idx.push_back(static_cast<int>(v));
        }
        try {
            terms.push_back({MonomialSupport::from_indices(idx, static_cast<int>(n)),
                             std::complex<double>(re, im)});
        } catch (const std::invalid_argument& e) {
            throw parse_error(lineno, e.what());
        }
    }
    return CubePolynomial::from_terms(static_cast<int>(n), std::move(terms));
}

inline CubePolynomial parse_polynomial(const std::string& text) {
    std::istringstream in(text);
    return parse_polynomial(in);
}

inline void serialize_polynomial(const CubePolynomial& f, std::ostream& out) {
    out << "n = " << f.variable_count() << "\n";
    for (const Term& t : f.terms()) {
        out << format_complex(t.coeff) << " :";
        t.support.for_each_index([&](int i) { out << ' ' << i; });
        out << "\n";
    }
}

inline std::string serialize_polynomial(const CubePolynomial& f) {
    std::ostringstream out;
    serialize_polynomial(f, out);
    return out.str();
}

}  // namespace cubepf
