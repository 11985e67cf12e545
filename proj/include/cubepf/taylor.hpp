#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "moment_kernel.hpp"
#include "polynomial.hpp"

namespace cubepf {

// E e^{lambda f} is zero-free for |lambda| <= 0.55/(L sqrt(d)); all Taylor
// estimates are run inside the smaller working disk |lambda| <= 1/(2 L sqrt(d)).
inline double zero_free_radius(double L, int d) {
    if (L <= 0.0) throw std::invalid_argument("Lipschitz parameter must be positive");
    if (d < 1) throw std::invalid_argument("degree must be at least 1");
    return 0.55 / (L * std::sqrt(static_cast<double>(d)));
}

inline double working_radius(double L, int d) {
    if (L <= 0.0) throw std::invalid_argument("Lipschitz parameter must be positive");
    if (d < 1) throw std::invalid_argument("degree must be at least 1");
    return 0.5 / (L * std::sqrt(static_cast<double>(d)));
}

// Disk membership is tested with a hair of relative slack. The measured
// radius inherits rounding noise from the coefficient-mass sums (relative
// error up to ~N machine epsilons), so a strict comparison can reject a
// boundary lambda — e.g. 1/(2 L sqrt d) for a facet restriction, whose true
// radius can only be larger than the parent's. The working radius keeps a
// genuine 10% margin to the zero-free radius, so 1e-12 of slack cannot
// affect the validity of any bound.
inline bool within_radius(double magnitude, double radius) {
    return magnitude <= radius * (1.0 + 1e-12);
}

struct DiskRadii {
    double zero_free = std::numeric_limits<double>::infinity();
    double working = std::numeric_limits<double>::infinity();
};

// Radii for f after stripping the constant term; infinite for constants and
// the zero polynomial (their partition function is a single exponential).
inline DiskRadii disk_radii(const CubePolynomial& f) {
    auto [f0, a0] = f.strip_constant();
    (void)a0;
    DiskRadii r;
    if (f0.is_zero()) return r;
    double L = f0.lipschitz();
    int d = f0.degree();
    r.zero_free = zero_free_radius(L, d);
    r.working = working_radius(L, d);
    return r;
}

namespace detail {

// First (polynomial-approximation) term of the additive log-scale bound.
// Inside m <= 5n this is the plain 50n/((m+1) 1.1^m); past 5n the same
// argument run with a degree-m truncation of E e^{lambda f} (any degree
// >= 5n retains the e^{-n} transfer term) gives 10m/((m+1) 1.1^m). The two
// branches agree at m = 5n and the combined function is strictly decreasing
// for every n >= 2, so order selection by linear scan stays well-defined.
inline double remainder_first_term(int n, int m) {
    double num = m <= 5 * n ? 50.0 * static_cast<double>(n) : 10.0 * static_cast<double>(m);
    return num / ((static_cast<double>(m) + 1.0) * std::pow(1.1, static_cast<double>(m)));
}

}  // namespace detail

// Additive bound on |ln E e^{lambda f} - T_m| (principal continuous branch)
// for zero-constant f on n >= 2 variables inside the working disk.
inline double taylor_remainder_bound(int n, int m) {
    if (n < 2) throw std::invalid_argument("the remainder bound requires n >= 2");
    if (m < 1) throw std::invalid_argument("order must be at least 1");
    return detail::remainder_first_term(n, m) + std::exp(-static_cast<double>(n));
}

// Same bound gated on the working disk: +infinity when |lambda| exceeds
// 1/(2 L sqrt(d)) (no claim outside), invalid_argument on nonsense inputs.
inline double error_bound(int n, int m, std::complex<double> lambda, double L, int d) {
    if (n < 2) throw std::invalid_argument("the remainder bound requires n >= 2");
    if (m < 1) throw std::invalid_argument("order must be at least 1");
    if (L <= 0.0) throw std::invalid_argument("Lipschitz parameter must be positive");
    if (d < 1) throw std::invalid_argument("degree must be at least 1");
    if (!within_radius(std::abs(lambda), working_radius(L, d)))
        return std::numeric_limits<double>::infinity();
    return taylor_remainder_bound(n, m);
}

// Smallest m whose remainder bound meets eps, i.e. first term <= eps - e^{-n};
// requires eps > e^{-n}. The scan is monotone, so it terminates.
inline int choose_order(int n, double eps) {
    if (n < 2) throw std::invalid_argument("order selection requires n >= 2");
    double slack = eps - std::exp(-static_cast<double>(n));
    if (!(slack > 0.0))
        throw std::domain_error("target accuracy " + std::to_string(eps) +
                                " is not achievable: it must exceed e^{-n} = " +
                                std::to_string(std::exp(-static_cast<double>(n))));
    for (int m = 1;; ++m) {
        if (detail::remainder_first_term(n, m) <= slack) return m;
        if (m > 1000000) throw std::logic_error("order scan failed to terminate");
    }
}

struct CumulantTable {
    // index k-1 holds the k-th derivative at 0: moment_derivs = E f^k,
    // cumulant_derivs = g^(k)(0) for g(t) = ln E e^{t f}.
    std::vector<std::complex<double>> moment_derivs;
    std::vector<std::complex<double>> cumulant_derivs;
};

// Triangular solve of h^(k) = sum_{j=1}^{k} C(k-1, j-1) g^(j) h^(k-j) with
// h^(0) = 1: reading the j = k term off gives g^(k) directly. Binomials come
// from a Pascal table in doubles (exact through C(49,24) and relatively
// accurate beyond).
inline CumulantTable cumulants_from_moments(const std::vector<std::complex<double>>& moments) {
    const int m = static_cast<int>(moments.size());
    CumulantTable t;
    t.moment_derivs = moments;
    t.cumulant_derivs.assign(moments.size(), {});
    if (m == 0) return t;

    std::vector<std::vector<double>> C(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) {
        auto& row = C[static_cast<std::size_t>(r)];
        row.assign(static_cast<std::size_t>(r) + 1, 1.0);
        for (int j = 1; j < r; ++j)
            row[static_cast<std::size_t>(j)] = C[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(j - 1)] +
                                               C[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(j)];
    }

    auto H = [&](int k) -> std::complex<double> {
        return k == 0 ? std::complex<double>{1.0} : moments[static_cast<std::size_t>(k - 1)];
    };
    for (int k = 1; k <= m; ++k) {
        std::complex<double> acc = H(k);
        for (int j = 1; j < k; ++j)
            acc -= C[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)] *
                   t.cumulant_derivs[static_cast<std::size_t>(j - 1)] * H(k - j);
        t.cumulant_derivs[static_cast<std::size_t>(k - 1)] = acc;
    }
    return t;
}

// T_m(mu) = sum_{k=1}^m g^(k)(0) mu^k / k!, ascending k with an incremental
// mu^k/k! factor (it only ever shrinks once mu^k is beaten by k!).
inline std::complex<double> taylor_eval(const std::vector<std::complex<double>>& cumulant_derivs,
                                        std::complex<double> mu) {
    std::complex<double> acc = 0.0;
    std::complex<double> weight = 1.0;  // mu^k / k!
    int k = 0;
    for (const std::complex<double>& g : cumulant_derivs) {
        ++k;
        weight *= mu / static_cast<double>(k);
        acc += g * weight;
    }
    return acc;
}

struct ApproxOptions {
    bool force = false;  // proceed outside the working disk (bound becomes +inf)
    double prune = 0.0;
    std::uint64_t max_terms = 100'000'000;
};

struct PartitionEstimate {
    std::complex<double> lambda;
    int order = 0;                      // m
    std::complex<double> taylor_value;  // T_m for f - alpha_0
    std::complex<double> estimate;      // e^{T_m} * e^{lambda alpha_0}
    double error_bound = 0.0;           // additive bound on the log scale
    bool within_disk = true;
    double prune = 0.0;                 // coefficient prune threshold in effect
    std::vector<std::uint64_t> term_counts;  // per power 1..m
};

// Taylor estimate of E e^{lambda f} at a fixed order m. Moments are taken of
// lambda*(f - alpha_0) when |lambda| < 1 (conditioning: powers stay bounded),
// of f - alpha_0 otherwise with the lambda powers folded into T_m; the two
// agree exactly in exact arithmetic. No complex logarithm is ever taken —
// the estimate is exp of a series.
inline PartitionEstimate approx_partition_order(const CubePolynomial& f, std::complex<double> lambda,
                                                int m, const ApproxOptions& opts = {}) {
    auto [f0, a0] = f.strip_constant();
    PartitionEstimate r;
    r.lambda = lambda;
    if (f0.is_zero()) {  // constant polynomial: E e^{lambda f} = e^{lambda alpha_0} exactly
        r.estimate = std::exp(lambda * a0);
        return r;
    }
    const int n = f.variable_count();
    if (n < 2) throw std::domain_error("Taylor estimation requires n >= 2");
    if (m < 1) throw std::invalid_argument("order must be at least 1");

    const double L = f0.lipschitz();
    const int d = f0.degree();
    const double wr = working_radius(L, d);
    r.within_disk = within_radius(std::abs(lambda), wr);
    if (!r.within_disk && !opts.force)
        throw std::domain_error("|lambda| = " + std::to_string(std::abs(lambda)) +
                                " is outside the working disk " + std::to_string(wr) +
                                " (zero-free disk " + std::to_string(zero_free_radius(L, d)) +
                                "); pass force to proceed without a bound");

    const bool scale = std::abs(lambda) < 1.0;
    const CubePolynomial base = scale ? lambda * f0 : f0;
    MomentsResult M = moments(base, m, MomentOptions{opts.prune, opts.max_terms});
    CumulantTable table = cumulants_from_moments(M.values);
    r.order = m;
    r.taylor_value = taylor_eval(table.cumulant_derivs, scale ? std::complex<double>{1.0} : lambda);
    r.estimate = std::exp(r.taylor_value) * std::exp(lambda * a0);
    r.error_bound = error_bound(n, m, lambda, L, d);
    r.prune = M.prune;
    r.term_counts = std::move(M.term_counts);
    return r;
}

// Convenience form: pick the order from the additive log-scale target eps
// (must exceed e^{-n}); the returned error_bound is then <= eps.
inline PartitionEstimate approx_partition(const CubePolynomial& f, std::complex<double> lambda,
                                          double eps, const ApproxOptions& opts = {}) {
    auto [f0, a0] = f.strip_constant();
    if (f0.is_zero()) {
        PartitionEstimate r;
        r.lambda = lambda;
        r.estimate = std::exp(lambda * a0);
        return r;
    }
    const int n = f.variable_count();
    if (n < 2) throw std::domain_error("Taylor estimation requires n >= 2");
    return approx_partition_order(f, lambda, choose_order(n, eps), opts);
}

}  // namespace cubepf
