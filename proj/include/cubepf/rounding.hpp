#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "exact.hpp"
#include "format.hpp"
#include "polynomial.hpp"
#include "taylor.hpp"

namespace cubepf {

struct RoundingOptions {
    // Facets with at most this many free variables get exact conditional
    // partition functions (2^free walk); 0 forces the Taylor path throughout.
    int exact_threshold = 20;
    int threads = 1;
    double prune = 0.0;
    std::uint64_t max_terms = 100'000'000;
};

struct ConditioningStep {
    int variable = 0;
    int sign = 0;
    double est_plus = 0.0;   // |estimate of E(e^{lambda f} | x_var = +1)|
    double est_minus = 0.0;
    double step_bound = 0.0;  // additive log-scale bound on both facet estimates (0 = exact)
};

struct ConditioningTrace {
    int n = 0;
    double lambda = 0.0;
    double epsilon = 0.0;
    double root_estimate = 0.0;  // (est_plus + est_minus)/2 of the first step
    std::uint64_t fingerprint = 0;
    CubePoint point;
    std::vector<ConditioningStep> steps;

    // Rigorous lower bound on f at the rounded point from the trace alone:
    // each step's chosen facet is within e^{-2 bound_i} of its parent, and
    // the root estimate is within e^{-bound_1} of the true mean, so
    //   lambda f(y) >= ln(root_estimate) - bound_1 - 2 sum_i bound_i.
    // With every bound_i <= eps/2n this is at least the advertised
    // e^{lambda f(y)} >= (1 - eps) E e^{lambda f}.
    double certified_lower_bound() const {
        if (steps.empty() || !(lambda > 0.0) || !(root_estimate > 0.0))
            throw std::domain_error("trace does not certify a bound");
        double total = steps.front().step_bound;
        for (const ConditioningStep& s : steps) total += 2.0 * s.step_bound;
        return (std::log(root_estimate) - total) / lambda;
    }

    std::string serialize() const {
        std::ostringstream out;
        out << "n = " << n << "\n";
        out << "lambda = " << format_double(lambda) << "\n";
        out << "epsilon = " << format_double(epsilon) << "\n";
        out << "root_estimate = " << format_double(root_estimate) << "\n";
        char fp[32];
        std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(fingerprint));
        out << "fingerprint = " << fp << "\n";
        int i = 0;
        for (const ConditioningStep& s : steps) {
            out << "step=" << ++i << " var=" << s.variable << " sign=" << (s.sign > 0 ? "+1" : "-1")
                << " est_plus=" << format_double(s.est_plus)
                << " est_minus=" << format_double(s.est_minus)
                << " bound=" << format_double(s.step_bound) << "\n";
        }
        out << "point=";
        for (int v = 1; v <= n; ++v) out << (point.sign(v) > 0 ? " +1" : " -1");
        out << "\n";
        return out.str();
    }
};

namespace detail {

// One facet estimate: exact subcube walk over the free prefix when allowed,
// Taylor estimate (with its achieved bound) otherwise. Returns magnitude.
inline double facet_estimate(const CubePolynomial& g, double lambda, int nfree, double eps_step,
                             const RoundingOptions& opts, double& bound_out) {
    if (nfree <= opts.exact_threshold) {
        bound_out = 0.0;
        return std::abs(partition_over_prefix(g, lambda, nfree, opts.threads));
    }
    ApproxOptions ao;
    ao.prune = opts.prune;
    ao.max_terms = opts.max_terms;
    PartitionEstimate est = approx_partition(g, lambda, eps_step, ao);
    bound_out = est.error_bound;
    return std::abs(est.estimate);
}

}  // namespace detail

// Successive conditioning: fixes x_n, x_{n-1}, ..., x_1 in turn, each time
// keeping the facet with the larger conditional partition estimate (ties go
// to +1). With per-step estimates within an additive log budget eps/(2n)
// the produced point y satisfies e^{lambda f(y)} >= (1 - eps) E e^{lambda f}.
inline ConditioningTrace round_to_point(const CubePolynomial& f, double lambda, double eps,
                                        const RoundingOptions& opts = {}) {
    if (!f.is_real()) throw std::invalid_argument("rounding requires a real polynomial");
    if (!(lambda > 0.0)) throw std::invalid_argument("rounding requires a positive real lambda");
    if (!(eps > 0.0) || eps >= 1.0) throw std::invalid_argument("epsilon must lie in (0,1)");
    const int n = f.variable_count();
    if (n < 1) throw std::invalid_argument("rounding requires at least one variable");

    auto [f0, a0] = f.strip_constant();
    (void)a0;
    if (!f0.is_zero()) {
        const double wr = working_radius(f0.lipschitz(), f0.degree());
        if (!within_radius(lambda, wr))
            throw std::domain_error("lambda = " + std::to_string(lambda) +
                                    " is outside the working disk " + std::to_string(wr) +
                                    " of the polynomial");
    }
    const double eps_step = eps / (2.0 * n);
    if (opts.exact_threshold < n && !(eps_step > std::exp(-static_cast<double>(n))))
        throw std::domain_error("per-step budget eps/(2n) = " + std::to_string(eps_step) +
                                " does not exceed e^{-n}; increase epsilon or the exact threshold");

    ConditioningTrace trace;
    trace.n = n;
    trace.lambda = lambda;
    trace.epsilon = eps;
    trace.fingerprint = f.fingerprint();
    trace.point = CubePoint(n, +1);
    trace.steps.reserve(static_cast<std::size_t>(n));

    CubePolynomial g = f;
    for (int i = n; i >= 1; --i) {
        const CubePolynomial gp = g.restrict_variable(i, +1);
        const CubePolynomial gm = g.restrict_variable(i, -1);
        double bp = 0.0, bm = 0.0;
        const double ep = detail::facet_estimate(gp, lambda, i - 1, eps_step, opts, bp);
        const double em = detail::facet_estimate(gm, lambda, i - 1, eps_step, opts, bm);
        ConditioningStep step;
        step.variable = i;
        step.sign = em > ep ? -1 : +1;
        step.est_plus = ep;
        step.est_minus = em;
        step.step_bound = std::max(bp, bm);
        if (i == n) trace.root_estimate = 0.5 * (ep + em);
        trace.point.set_sign(i, step.sign);
        trace.steps.push_back(step);
        g = step.sign > 0 ? gp : gm;
    }
    return trace;
}

// Value of f at the traced point, after checking the trace actually belongs
// to this polynomial (dimension and fingerprint).
inline double greedy_value(const ConditioningTrace& trace, const CubePolynomial& f) {
    if (!f.is_real()) throw std::invalid_argument("greedy value requires a real polynomial");
    if (trace.n != f.variable_count() || trace.fingerprint != f.fingerprint())
        throw std::invalid_argument("trace does not match the polynomial (dimension or fingerprint)");
    return f.evaluate(trace.point).real();
}

}  // namespace cubepf
