#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "exact.hpp"
#include "format.hpp"
#include "poly_io.hpp"
#include "polynomial.hpp"
#include "rounding.hpp"
#include "taylor.hpp"

namespace cubepf {

// One linear equation over Z_2: xor of the variables in `support` equals rhs.
struct Z2Equation {
    MonomialSupport support;
    int rhs = 0;  // 0 or 1
};

// A list (order preserved, duplicates allowed) of equations on n variables.
struct Z2System {
    int n = 0;
    std::vector<Z2Equation> equations;
};

// Text format mirrors the polynomial one:
//
//     n = 12
//     0 : 1 2 5     <- z1 + z2 + z5 = 0 (mod 2)
//     1 : 3 4
//
// Every equation needs at least one variable; '#' comments allowed.
inline Z2System parse_system(std::istream& in) {
    std::string line;
    int lineno = 0;
    long long n = -1;
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

    Z2System sys;
    sys.n = static_cast<int>(n);
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = detail::tokenize(line);
        if (toks.empty()) continue;
        std::vector<std::string> split;
        for (std::string& t : toks) {
            auto pos = t.find(':');
            if (pos == std::string::npos) {
                split.push_back(std::move(t));
                continue;
            }
            if (pos > 0) split.push_back(t.substr(0, pos));
            split.push_back(":");
            if (pos + 1 < t.size()) split.push_back(t.substr(pos + 1));
        }
        if (split.size() < 2 || split[1] != ":")
            throw parse_error(lineno, "expected '<rhs> : <indices>'");
        long long rhs;
        if (!parse_int(split[0], rhs) || (rhs != 0 && rhs != 1))
            throw parse_error(lineno, "right-hand side must be 0 or 1, got '" + split[0] + "'");
        std::vector<int> idx;
        for (std::size_t k = 2; k < split.size(); ++k) {
            long long v;
            if (!parse_int(split[k], v))
                throw parse_error(lineno, "bad variable index '" + split[k] + "'");
            if (v < 1 || v > n)
                throw parse_error(lineno, "variable index " + std::to_string(v) +
                                              " out of range [1," + std::to_string(n) + "]");
            idx.push_back(static_cast<int>(v));
        }
        if (idx.empty())
            throw parse_error(lineno, "equation has an empty variable list");
        try {
            sys.equations.push_back(
                {MonomialSupport::from_indices(idx, sys.n), static_cast<int>(rhs)});
        } catch (const std::invalid_argument& e) {
            throw parse_error(lineno, e.what());
        }
    }
    return sys;
}

inline Z2System parse_system(const std::string& text) {
    std::istringstream in(text);
    return parse_system(in);
}

inline void serialize_system(const Z2System& sys, std::ostream& out) {
    out << "n = " << sys.n << "\n";
    for (const Z2Equation& e : sys.equations) {
        out << e.rhs << " :";
        e.support.for_each_index([&](int i) { out << ' ' << i; });
        out << "\n";
    }
}

inline std::string serialize_system(const Z2System& sys) {
    std::ostringstream out;
    serialize_system(sys, out);
    return out.str();
}

// Encoding x_i = (-1)^{z_i}: equation (I, b) becomes the monomial
// (-1)^b x^I, so f(x(z)) = #satisfied - #unsatisfied. Duplicate supports
// merge (and may cancel); distinct-support systems map to +-1 coefficients.
inline CubePolynomial system_to_polynomial(const Z2System& sys) {
    std::vector<Term> terms;
    terms.reserve(sys.equations.size());
    for (const Z2Equation& e : sys.equations) {
        if (e.support.empty())
            throw std::invalid_argument("equation with an empty variable list is not allowed");
        if (e.support.word_count() != MonomialSupport::words_for(sys.n))
            throw std::invalid_argument("equation support width does not match the system");
        terms.push_back({e.support, e.rhs ? -1.0 : 1.0});
    }
    return CubePolynomial::from_terms(sys.n, std::move(terms));
}

// Inverse of the encoding for +-1-coefficient polynomials with no constant
// term; equations come out in canonical (sorted-support) order.
inline Z2System polynomial_to_system(const CubePolynomial& f) {
    Z2System sys;
    sys.n = f.variable_count();
    sys.equations.reserve(f.term_count());
    for (const Term& t : f.terms()) {
        if (t.support.empty())
            throw std::invalid_argument("polynomial has a constant term; not an equation system");
        if (t.coeff != std::complex<double>{1.0} && t.coeff != std::complex<double>{-1.0})
            throw std::invalid_argument("coefficients must be exactly +1 or -1");
        sys.equations.push_back({t.support, t.coeff.real() < 0 ? 1 : 0});
    }
    return sys;
}

// Directly counts satisfied equations for a 0/1 assignment (independent of
// the polynomial encoding; used for cross-checks).
inline long long satisfied_count(const Z2System& sys, const std::vector<int>& z) {
    if (static_cast<int>(z.size()) != sys.n)
        throw std::invalid_argument("assignment length does not match the system");
    long long sat = 0;
    for (const Z2Equation& e : sys.equations) {
        int parity = 0;
        e.support.for_each_index([&](int i) { parity ^= z[static_cast<std::size_t>(i - 1)] & 1; });
        if (parity == e.rhs) ++sat;
    }
    return sat;
}

// Per-variable occurrence statistics of a polynomial's monomials, split by
// coefficient sign (positive = Re c > 0).
struct OccurrenceProfile {
    std::vector<long long> counts;
    std::vector<long long> positive;
    std::vector<long long> negative;
    long long k_max = 0;  // max over variables of counts
    bool has_constant = false;
};

inline OccurrenceProfile occurrence_profile(const CubePolynomial& f) {
    OccurrenceProfile p;
    const std::size_t n = static_cast<std::size_t>(f.variable_count());
    p.counts.assign(n, 0);
    p.positive.assign(n, 0);
    p.negative.assign(n, 0);
    for (const Term& t : f.terms()) {
        if (t.support.empty()) {
            p.has_constant = true;
            continue;
        }
        const bool pos = t.coeff.real() > 0.0;
        t.support.for_each_index([&](int i) {
            std::size_t j = static_cast<std::size_t>(i - 1);
            ++p.counts[j];
            ++(pos ? p.positive[j] : p.negative[j]);
        });
    }
    for (long long c : p.counts) p.k_max = std::max(p.k_max, c);
    return p;
}

struct BoundParameter {
    std::string name;
    double value = 0.0;
};

// A lower bound on E e^{lambda f}, applicable only when hypotheses_met; the
// checks record why not instead of throwing.
struct BoundCertificate {
    std::string id;
    bool hypotheses_met = true;
    std::vector<std::string> unmet;
    double log_value = 0.0;  // ln of the claimed bound
    double value = 1.0;      // the bound itself (may overflow to +inf)
    std::vector<BoundParameter> parameters;

    void require(bool ok, const std::string& reason) {
        if (!ok) {
            hypotheses_met = false;
            unmet.push_back(reason);
        }
    }
    void set_log(double lv) {
        log_value = lv;
        value = std::exp(lv);
    }
};

namespace detail {

inline bool is_pm_one(const CubePolynomial& f) {
    for (const Term& t : f.terms())
        if (t.coeff != std::complex<double>{1.0} && t.coeff != std::complex<double>{-1.0})
            return false;
    return true;
}

inline void require_pm1_zero_constant(BoundCertificate& c, const CubePolynomial& f) {
    c.require(f.is_real() && is_pm_one(f), "coefficients must be exactly +1 or -1");
    c.require(f.constant_term() == std::complex<double>{}, "constant term must be zero");
}

}  // namespace detail

// E e^{lambda f} >= exp(3 lambda^2 delta^2 |F| / 16) for +-1 systems whose
// variables occur at most 4 times, where delta |F| is the maximum of f
// (a smaller certified delta still yields a valid, weaker bound).
inline BoundCertificate advantage_bound(const CubePolynomial& f, double delta, double lambda) {
    BoundCertificate c;
    c.id = "advantage";
    detail::require_pm1_zero_constant(c, f);
    OccurrenceProfile p = occurrence_profile(f);
    c.require(p.k_max <= 4, "some variable occurs in more than 4 monomials (k_max = " +
                                std::to_string(p.k_max) + ")");
    c.require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0,1]");
    c.require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
    const double F = static_cast<double>(f.term_count());
    c.parameters = {{"lambda", lambda}, {"delta", delta}, {"F", F}};
    c.set_log(3.0 * lambda * lambda * delta * delta * F / 16.0);
    return c;
}

// E e^{lambda f} >= exp(3 lambda^2 |F| / 16) for +-1 systems with at most k
// occurrences per variable (k > 2) whose maximum is >= (k-1)/k |F|;
// max_lower is any certified lower bound on the maximum of f.
inline BoundCertificate near_max_bound(const CubePolynomial& f, int k, double max_lower,
                                       double lambda) {
    BoundCertificate c;
    c.id = "near-max";
    detail::require_pm1_zero_constant(c, f);
    OccurrenceProfile p = occurrence_profile(f);
    c.require(k > 2, "k must exceed 2");
    c.require(p.k_max <= k, "some variable occurs more than k = " + std::to_string(k) + " times");
    const double F = static_cast<double>(f.term_count());
    const double need = F * (static_cast<double>(k) - 1.0) / static_cast<double>(k);
    c.require(max_lower >= need, "certified maximum " + format_double(max_lower) +
                                     " is below (k-1)/k |F| = " + format_double(need));
    c.require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
    c.parameters = {{"lambda", lambda}, {"k", static_cast<double>(k)}, {"F", F},
                    {"max_lower", max_lower}};
    c.set_log(3.0 * lambda * lambda * F / 16.0);
    return c;
}

// E e^{lambda f} >= prod_I cosh(lambda alpha_I) when every coefficient is
// nonnegative (lambda >= 0).
inline BoundCertificate cosh_product_bound(const CubePolynomial& f, double lambda) {
    BoundCertificate c;
    c.id = "cosh-product";
    c.require(f.is_real(), "coefficients must be real");
    c.require(lambda >= 0.0, "lambda must be nonnegative");
    double lv = 0.0;
    for (const Term& t : f.terms()) {
        if (t.coeff.real() < 0.0) {
            c.require(false, "negative coefficient on a monomial");
            break;
        }
        lv += std::log(std::cosh(lambda * t.coeff.real()));
    }
    c.parameters = {{"lambda", lambda}, {"N", static_cast<double>(f.term_count())}};
    c.set_log(lv);
    return c;
}

// E e^{lambda f} >= exp(3 lambda^2 max(0, |G| - (k-1)|H|) / 8) for f = g - h
// with unit coefficients, zero constant terms and at most k occurrences per
// variable; |G|, |H| count positive / negative monomials. (The max with 0 is
// Jensen: E e^{lambda f} >= 1 whenever E f = 0.)
inline BoundCertificate signed_count_bound(const CubePolynomial& f, int k, double lambda) {
    BoundCertificate c;
    c.id = "signed-count";
    detail::require_pm1_zero_constant(c, f);
    OccurrenceProfile p = occurrence_profile(f);
    c.require(k > 0, "k must be positive");
    c.require(p.k_max <= k, "some variable occurs more than k = " + std::to_string(k) + " times");
    c.require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
    double G = 0.0, H = 0.0;
    for (const Term& t : f.terms()) (t.coeff.real() > 0.0 ? G : H) += 1.0;
    c.parameters = {{"lambda", lambda}, {"k", static_cast<double>(k)}, {"G", G}, {"H", H}};
    c.set_log(std::max(0.0, 3.0 * lambda * lambda * (G - (static_cast<double>(k) - 1.0) * H) / 8.0));
    return c;
}

// E e^{lambda f} >= exp(3 lambda^2 (sqrt|G| - sqrt|H|)^2 / 8) for f = g - h
// with unit coefficients, zero constant terms, |G| >= |H| and pairwise
// disjoint negative supports. (The same bound holds with the disjointness
// relaxed to: each variable in at most two negative monomials, and at most
// two positive ones when in exactly two negative ones.)
inline BoundCertificate disjoint_negatives_bound(const CubePolynomial& f, double lambda) {
    BoundCertificate c;
    c.id = "disjoint-negatives";
    detail::require_pm1_zero_constant(c, f);
    OccurrenceProfile p = occurrence_profile(f);
    double G = 0.0, H = 0.0;
    for (const Term& t : f.terms()) (t.coeff.real() > 0.0 ? G : H) += 1.0;
    c.require(G >= H, "positive monomials must be at least as many as negative ones");
    long long worst = 0;
    for (long long v : p.negative) worst = std::max(worst, v);
    c.require(worst <= 1, "negative supports are not pairwise disjoint");
    c.require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
    c.parameters = {{"lambda", lambda}, {"G", G}, {"H", H}};
    const double s = std::sqrt(G) - std::sqrt(H);
    c.set_log(3.0 * lambda * lambda * s * s / 8.0);
    return c;
}

struct SolveOptions {
    double epsilon = 0.25;
    RoundingOptions rounding;
    // Exhaustive maximization (for an exact delta) is attempted when n fits.
    int oracle_cap = 24;
    int threads = 1;
};

struct SolveResult {
    std::vector<int> assignment;  // z bits, 0/1
    long long satisfied = 0;
    long long value = 0;  // f(y) = 2 satisfied - #equations
    double lambda = 0.0;
    bool max_exact = false;   // delta came from exhaustive maximization
    long long max_value = 0;  // valid when max_exact
    ConditioningTrace trace;
    std::vector<BoundCertificate> certificates;
    // Trace-certified lower bound on f(y) and the a-priori bound combining
    // the best applicable certificate with the (1 - eps) rounding guarantee;
    // NaN when no certificate applies.
    double procedural_bound = 0.0;
    double certificate_bound = std::numeric_limits<double>::quiet_NaN();
};

// End-to-end MAX-LIN driver: encode, pick lambda inside the working disk
// (1/(8 sqrt d) for occurrence <= 4, else 1/(2 k_max sqrt d)), round by
// successive conditioning, decode, and attach every applicable bound
// certificate. Certificates never throw; inapplicable ones carry reasons.
inline SolveResult solve_z2(const Z2System& sys, const SolveOptions& opts = {}) {
    SolveResult r;
    r.assignment.assign(static_cast<std::size_t>(sys.n), 0);
    if (sys.equations.empty()) return r;

    const CubePolynomial f = system_to_polynomial(sys);
    const long long m_eq = static_cast<long long>(sys.equations.size());
    const long long F = static_cast<long long>(f.term_count());
    if (F == 0) {  // equations cancelled pairwise; every assignment satisfies half
        r.satisfied = satisfied_count(sys, r.assignment);
        return r;
    }

    OccurrenceProfile prof = occurrence_profile(f);
    const int d = f.degree();
    const long long kmax = prof.k_max;
    r.lambda = kmax <= 4 ? 1.0 / (8.0 * std::sqrt(static_cast<double>(d)))
                         : 1.0 / (2.0 * static_cast<double>(kmax) * std::sqrt(static_cast<double>(d)));

    RoundingOptions ro = opts.rounding;
    ro.threads = opts.threads;
    r.trace = round_to_point(f, r.lambda, opts.epsilon, ro);

    for (int i = 1; i <= sys.n; ++i)
        r.assignment[static_cast<std::size_t>(i - 1)] = r.trace.point.sign(i) > 0 ? 0 : 1;
    // satisfied = (#equations + f(y)) / 2 in integer arithmetic: each
    // equation contributes +-1 to f(y), merged terms included.
    const double fy = f.evaluate(r.trace.point).real();
    r.value = std::llround(fy);
    r.satisfied = (m_eq + r.value) / 2;

    // delta for the advantage certificate: exact when the cube fits the
    // oracle cap, otherwise the rounded value itself is a valid lower bound.
    double max_lower = static_cast<double>(r.value);
    if (sys.n <= opts.oracle_cap && sys.n <= 62) {
        OracleOptions oo;
        oo.cap = opts.oracle_cap;
        oo.threads = opts.threads;
        MaxResult mx = exact_max(f, oo);
        r.max_exact = true;
        r.max_value = std::llround(mx.value);
        max_lower = mx.value;
    }
    const double delta = std::max(0.0, max_lower) / static_cast<double>(F);

    r.certificates.push_back(advantage_bound(f, delta, r.lambda));
    r.certificates.push_back(
        near_max_bound(f, static_cast<int>(std::max<long long>(kmax, 3)), max_lower, r.lambda));
    r.certificates.push_back(cosh_product_bound(f, r.lambda));
    r.certificates.push_back(signed_count_bound(f, static_cast<int>(std::max<long long>(kmax, 1)),
                                                r.lambda));
    r.certificates.push_back(disjoint_negatives_bound(f, r.lambda));

    r.procedural_bound = r.trace.certified_lower_bound();
    double best_log = -std::numeric_limits<double>::infinity();
    for (const BoundCertificate& c : r.certificates)
        if (c.hypotheses_met) best_log = std::max(best_log, c.log_value);
    if (best_log > -std::numeric_limits<double>::infinity())
        r.certificate_bound = (best_log + std::log1p(-opts.epsilon)) / r.lambda;
    return r;
}

}  // namespace cubepf
