#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "polynomial.hpp"
#include "z2.hpp"

namespace cubepf {

// Deterministic (seeded) instance generators used by the self-test harness
// and benchmarks. Coefficients are uniform in [-1,1] (plus i[-1,1] when
// complex); supports are distinct and nonempty.

struct PolyGenOptions {
    int n = 8;
    int terms = 10;        // requested; fewer if the support pool is exhausted
    int max_degree = 3;
    bool complex_coeffs = false;
    bool zero_constant = true;  // when false a constant term may be added
};

inline CubePolynomial random_polynomial(std::mt19937_64& rng, const PolyGenOptions& opt) {
    if (opt.n < 1 || opt.max_degree < 1) throw std::invalid_argument("bad generator parameters");
    std::uniform_int_distribution<int> card(1, std::min(opt.max_degree, opt.n));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<int> vars(static_cast<std::size_t>(opt.n));
    std::iota(vars.begin(), vars.end(), 1);

    std::vector<Term> terms;
    std::vector<MonomialSupport> seen;
    int attempts = 0;
    while (static_cast<int>(terms.size()) < opt.terms && attempts < opt.terms * 50) {
        ++attempts;
        const int c = card(rng);
        for (int i = 0; i < c; ++i)
            std::swap(vars[static_cast<std::size_t>(i)],
                      vars[static_cast<std::size_t>(i) +
                           rng() % static_cast<std::uint64_t>(opt.n - i)]);
        MonomialSupport s = MonomialSupport::from_indices({vars.data(), static_cast<std::size_t>(c)},
                                                          opt.n);
        if (std::any_of(seen.begin(), seen.end(), [&](const MonomialSupport& t) { return t == s; }))
            continue;
        seen.push_back(s);
        std::complex<double> coeff = opt.complex_coeffs
                                         ? std::complex<double>(unit(rng), unit(rng))
                                         : std::complex<double>(unit(rng));
        if (coeff == std::complex<double>{}) coeff = 0.5;  // keep the term
        terms.push_back({std::move(s), coeff});
    }
    if (!opt.zero_constant) {
        std::complex<double> c0(unit(rng), opt.complex_coeffs ? unit(rng) : 0.0);
        terms.push_back({MonomialSupport(MonomialSupport::words_for(opt.n)), c0});
    }
    return CubePolynomial::from_terms(opt.n, std::move(terms));
}

// Random +-1 system with at most k occurrences of every variable and at most
// d variables per equation; stops early if the occurrence budget runs out.
inline Z2System random_bounded_system(std::mt19937_64& rng, int n, int m, int d, int k) {
    if (n < 1 || d < 1 || k < 1) throw std::invalid_argument("bad generator parameters");
    Z2System sys;
    sys.n = n;
    std::vector<int> budget(static_cast<std::size_t>(n), k);
    std::vector<MonomialSupport> seen;
    std::uniform_int_distribution<int> card(1, d);
    int attempts = 0;
    while (static_cast<int>(sys.equations.size()) < m && attempts < m * 50) {
        ++attempts;
        std::vector<int> avail;
        for (int i = 1; i <= n; ++i)
            if (budget[static_cast<std::size_t>(i - 1)] > 0) avail.push_back(i);
        int c = std::min(card(rng), static_cast<int>(avail.size()));
        if (c < 1) break;
        for (int i = 0; i < c; ++i)
            std::swap(avail[static_cast<std::size_t>(i)],
                      avail[static_cast<std::size_t>(i) +
                            rng() % static_cast<std::uint64_t>(avail.size() - static_cast<std::size_t>(i))]);
        MonomialSupport s =
            MonomialSupport::from_indices({avail.data(), static_cast<std::size_t>(c)}, n);
        if (std::any_of(seen.begin(), seen.end(), [&](const MonomialSupport& t) { return t == s; }))
            continue;
        seen.push_back(s);
        for (int i = 0; i < c; ++i) --budget[static_cast<std::size_t>(avail[static_cast<std::size_t>(i)] - 1)];
        sys.equations.push_back({std::move(s), static_cast<int>(rng() & 1u)});
    }
    return sys;
}

// Same shape, but the right-hand sides are consistent with a hidden
// assignment except for a fraction `noise` of flipped equations, so the
// optimum is known to be >= (1 - noise fraction) of the system.
inline Z2System planted_system(std::mt19937_64& rng, int n, int m, int d, int k, double noise,
                               std::vector<int>* hidden_out = nullptr) {
    Z2System sys = random_bounded_system(rng, n, m, d, k);
    std::vector<int> hidden(static_cast<std::size_t>(n));
    for (int& b : hidden) b = static_cast<int>(rng() & 1u);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Z2Equation& e : sys.equations) {
        int parity = 0;
        e.support.for_each_index([&](int i) { parity ^= hidden[static_cast<std::size_t>(i - 1)]; });
        e.rhs = unit(rng) < noise ? parity ^ 1 : parity;
    }
    if (hidden_out) *hidden_out = std::move(hidden);
    return sys;
}

}  // namespace cubepf
