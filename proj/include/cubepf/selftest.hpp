#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "exact.hpp"
#include "instances.hpp"
#include "polynomial.hpp"
#include "rounding.hpp"
#include "taylor.hpp"
#include "z2.hpp"

namespace cubepf {

// Built-in diagnostic suites: every algebraic path is cross-checked against
// an independent brute-force computation on instances small enough to
// enumerate. "small" keeps a CI-friendly runtime; "large" widens sizes and
// instance counts.

struct SelftestSuite {
    std::string name;
    int checks = 0;
    int failures = 0;
    std::string first_failure;
};

struct SelftestReport {
    std::vector<SelftestSuite> suites;
    bool ok = true;
};

namespace detail {

class SuiteRecorder {
public:
    explicit SuiteRecorder(std::string name) { suite_.name = std::move(name); }

    void check(bool ok, const std::string& what) {
        ++suite_.checks;
        if (!ok) {
            ++suite_.failures;
            if (suite_.first_failure.empty()) suite_.first_failure = what;
        }
    }

    void close(SelftestReport& report, std::ostream* log) {
        if (suite_.failures > 0) report.ok = false;
        if (log) {
            *log << suite_.name << ": " << suite_.checks << " checks, " << suite_.failures
                 << " failures";
            if (!suite_.first_failure.empty()) *log << " (first: " << suite_.first_failure << ")";
            *log << "\n";
        }
        report.suites.push_back(std::move(suite_));
    }

private:
    SelftestSuite suite_;
};

// Brute-force reference evaluation in plain binary order: an independent
// path from the Gray-code walk used by the library.
inline std::complex<double> naive_partition(const CubePolynomial& f, std::complex<double> lambda) {
    const int n = f.variable_count();
    std::complex<double> sum = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        CubePoint p(n, +1);
        for (int i = 1; i <= n; ++i)
            if ((mask >> (i - 1)) & 1u) p.set_sign(i, -1);
        sum += std::exp(lambda * f.evaluate(p));
    }
    return sum * std::ldexp(1.0, -n);
}

inline std::complex<double> naive_moment(const CubePolynomial& f, int k) {
    const int n = f.variable_count();
    std::complex<double> sum = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        CubePoint p(n, +1);
        for (int i = 1; i <= n; ++i)
            if ((mask >> (i - 1)) & 1u) p.set_sign(i, -1);
        std::complex<double> v = f.evaluate(p), pw = 1.0;
        for (int j = 0; j < k; ++j) pw *= v;
        sum += pw;
    }
    return sum * std::ldexp(1.0, -n);
}

inline bool close(std::complex<double> a, std::complex<double> b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

inline SelftestReport run_selftests(const std::string& tier, std::uint64_t seed,
                                    std::ostream* log = nullptr) {
    const bool large = tier == "large";
    if (!large && tier != "small")
        throw std::invalid_argument("unknown self-test tier '" + tier + "' (small|large)");
    const int reps = large ? 24 : 8;
    const int nmax = large ? 12 : 9;
    SelftestReport report;
    std::mt19937_64 rng(seed);

    {
        detail::SuiteRecorder s("support-algebra");
        for (int r = 0; r < reps * 4; ++r) {
            const int n = 1 + static_cast<int>(rng() % 100);
            auto rand_support = [&] {
                MonomialSupport m(MonomialSupport::words_for(n));
                for (int i = 1; i <= n; ++i)
                    if (rng() & 1u) m.set(i);
                return m;
            };
            MonomialSupport a = rand_support(), b = rand_support(), c = rand_support();
            s.check(((a ^ b) ^ c) == (a ^ (b ^ c)), "xor associativity");
            s.check((a ^ b) == (b ^ a), "xor commutativity");
            s.check((a ^ a).empty(), "xor self-inverse");
            s.check(MonomialSupport::from_indices(a.indices(), n) == a, "index round-trip");
            const bool lt = a < b, gt = a > b, eq = a == b;
            s.check((lt ? 1 : 0) + (gt ? 1 : 0) + (eq ? 1 : 0) == 1, "total order trichotomy");
        }
        s.close(report, log);
    }

    {
        detail::SuiteRecorder s("polynomial-oracle");
        for (int r = 0; r < reps; ++r) {
            const int n = 3 + static_cast<int>(rng() % 5);
            PolyGenOptions o;
            o.n = n;
            o.terms = 6;
            o.max_degree = 3;
            o.complex_coeffs = (r % 2) == 1;
            o.zero_constant = false;
            CubePolynomial f = random_polynomial(rng, o);
            CubePolynomial g = random_polynomial(rng, o);
            CubePolynomial fg = f * g;
            CubePolynomial fpg = f + g;
            const int var = 1 + static_cast<int>(rng() % n);
            CubePolynomial fr = f.restrict_variable(var, -1);
            CubePolynomial ff = f.flip_variable(var);
            bool ok_mul = true, ok_add = true, ok_res = true, ok_flip = true;
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
                CubePoint p(n, +1);
                for (int i = 1; i <= n; ++i)
                    if ((mask >> (i - 1)) & 1u) p.set_sign(i, -1);
                auto fv = f.evaluate(p), gv = g.evaluate(p);
                ok_mul = ok_mul && detail::close(fg.evaluate(p), fv * gv, 1e-12);
                ok_add = ok_add && detail::close(fpg.evaluate(p), fv + gv, 1e-12);
                CubePoint q = p;
                q.set_sign(var, -1);
                ok_res = ok_res && detail::close(fr.evaluate(p), f.evaluate(q), 1e-12);
                CubePoint w = p;
                w.set_sign(var, -p.sign(var));
                ok_flip = ok_flip && detail::close(ff.evaluate(p), f.evaluate(w), 1e-12);
            }
            s.check(ok_mul, "product matches pointwise evaluation");
            s.check(ok_add, "sum matches pointwise evaluation");
            s.check(ok_res, "restriction matches substitution");
            s.check(ok_flip, "flip matches substitution");
        }
        s.close(report, log);
    }

    {
        detail::SuiteRecorder s("partition-oracle");
        for (int r = 0; r < reps; ++r) {
            const int n = 3 + static_cast<int>(rng() % (nmax - 3));
            PolyGenOptions o;
            o.n = n;
            o.terms = 2 * n;
            o.max_degree = 3;
            o.complex_coeffs = (r % 2) == 1;
            o.zero_constant = false;
            CubePolynomial f = random_polynomial(rng, o);
            std::complex<double> lambda(0.3, (r % 2) ? 0.2 : 0.0);
            s.check(detail::close(exact_partition(f, lambda), detail::naive_partition(f, lambda), 1e-11),
                    "gray-code partition matches naive sum");
            OracleOptions two;
            two.threads = 2;
            s.check(detail::close(exact_partition(f, lambda, two), detail::naive_partition(f, lambda),
                                  1e-11),
                    "blocked partition matches naive sum");
        }
        s.close(report, log);
    }

    {
        detail::SuiteRecorder s("product-form");
        for (int n : {4, 7, large ? 14 : 10}) {
            CubePolynomial f = CubePolynomial::sum_of_variables(n);
            for (double lam : {0.1, 0.45}) {
                double expect = std::pow(std::cosh(lam), n);
                s.check(detail::close(exact_partition(f, lam), expect, 1e-12),
                        "independent-sum closed form");
            }
        }
        s.close(report, log);
    }

    {
        detail::SuiteRecorder s("moments-and-cumulants");
        for (int r = 0; r < reps; ++r) {
            const int n = 3 + static_cast<int>(rng() % (nmax - 3));
            PolyGenOptions o;
            o.n = n;
            o.terms = n + 2;
            o.max_degree = 3;
            o.complex_coeffs = (r % 3) == 1;
            CubePolynomial f = random_polynomial(rng, o);
            const int m = large ? 8 : 6;
            MomentsResult M = moments(f, m);
            bool ok = true;
            for (int k = 1; k <= m; ++k)
                ok = ok && detail::close(M.values[static_cast<std::size_t>(k - 1)],
                                         detail::naive_moment(f, k), 1e-9);
            s.check(ok, "symbolic moments match enumerated moments");

            CumulantTable t = cumulants_from_moments(M.values);
            // resubstitution: h^(k) = sum_j C(k-1,j-1) g^(j) h^(k-j)
            bool resub = true;
            std::vector<std::vector<double>> C(static_cast<std::size_t>(m));
            for (int row = 0; row < m; ++row) {
                C[static_cast<std::size_t>(row)].assign(static_cast<std::size_t>(row) + 1, 1.0);
                for (int j = 1; j < row; ++j)
                    C[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] =
                        C[static_cast<std::size_t>(row - 1)][static_cast<std::size_t>(j - 1)] +
                        C[static_cast<std::size_t>(row - 1)][static_cast<std::size_t>(j)];
            }
            for (int k = 1; k <= m; ++k) {
                std::complex<double> acc = 0.0;
                for (int j = 1; j <= k; ++j) {
                    std::complex<double> h =
                        k == j ? std::complex<double>{1.0}
                               : M.values[static_cast<std::size_t>(k - j - 1)];
                    acc += C[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)] *
                           t.cumulant_derivs[static_cast<std::size_t>(j - 1)] * h;
                }
                resub = resub && detail::close(acc, M.values[static_cast<std::size_t>(k - 1)], 1e-9);
            }
            s.check(resub, "cumulants resubstitute to moments");
        }
        s.close(report, log);
    }

    {
        detail::SuiteRecorder s("taylor-bound");
        for (int r = 0; r < reps; ++r) {
            const int n = 4 + static_cast<int>(rng() % (nmax - 3));
            PolyGenOptions o;
            o.n = n;
            o.terms = 2 * n;
            o.max_degree = 1 + static_cast<int>(rng() % 3);
            CubePolynomial f = random_polynomial(rng, o);
            if (f.is_zero()) continue;
            const double lam = working_radius(f.lipschitz(), f.degree()) * 0.9;
            const double truth = std::log(exact_partition(f, lam).real());
            const int m = large ? 12 : 8;
            PartitionEstimate est = approx_partition_order(f, lam, m);
            s.check(std::abs(std::log(est.estimate.real()) - truth) <= est.error_bound,
                    "log-scale error within the advertised bound");
        }
        s.close(report, log);
    }

    {
        detail::SuiteRecorder s("zero-free-circle");
        for (int r = 0; r < reps; ++r) {
            const int n = 4 + static_cast<int>(rng() % (nmax - 3));
            PolyGenOptions o;
            o.n = n;
            o.terms = 2 * n;
            o.max_degree = 3;
            o.complex_coeffs = (r % 2) == 1;
            CubePolynomial f = random_polynomial(rng, o);
            if (f.is_zero()) continue;
            const double radius = working_radius(f.lipschitz(), f.degree());
            bool ok = true;
            for (int a = 0; a < 16; ++a) {
                const double ang = 2.0 * 3.14159265358979323846 * a / 16;
                std::complex<double> lam = radius * std::complex<double>(std::cos(ang), std::sin(ang));
                ok = ok && std::abs(exact_partition(f, lam)) >= std::pow(0.41, n) * 0.999;
            }
            s.check(ok, "partition function stays off zero on the working circle");
        }
        s.close(report, log);
    }

    {
        detail::SuiteRecorder s("conditioning");
        for (int r = 0; r < reps; ++r) {
            const int n = 4 + static_cast<int>(rng() % (nmax - 3));
            PolyGenOptions o;
            o.n = n;
            o.terms = 2 * n;
            o.max_degree = 3;
            CubePolynomial f = random_polynomial(rng, o);
            if (f.is_zero()) continue;
            const double lam = working_radius(f.lipschitz(), f.degree()) * 0.8;
            // martingale split
            CubePolynomial fp = f.restrict_variable(n, +1), fm = f.restrict_variable(n, -1);
            s.check(detail::close(exact_partition(f, lam),
                                  0.5 * (exact_partition(fp, lam) + exact_partition(fm, lam)), 1e-12),
                    "facet averaging identity");
            const double eps = 0.4;
            RoundingOptions ro;  // exact mode at these sizes
            ConditioningTrace tr = round_to_point(f, lam, eps, ro);
            const double fy = greedy_value(tr, f);
            const double truth = exact_partition(f, lam).real();
            s.check(std::exp(lam * fy) >= (1.0 - eps) * truth * (1.0 - 1e-10),
                    "rounded point meets the (1-eps) guarantee (exact mode)");
            ro.exact_threshold = 0;  // force the Taylor path
            ConditioningTrace tt = round_to_point(f, lam, eps, ro);
            s.check(std::exp(lam * greedy_value(tt, f)) >= (1.0 - eps) * truth * (1.0 - 1e-10),
                    "rounded point meets the (1-eps) guarantee (taylor mode)");
        }
        s.close(report, log);
    }

    {
        detail::SuiteRecorder s("equation-systems");
        for (int r = 0; r < reps; ++r) {
            const int n = 4 + static_cast<int>(rng() % (nmax - 3));
            Z2System sys = random_bounded_system(rng, n, 2 * n, 3, 4);
            if (sys.equations.empty()) continue;
            CubePolynomial f = system_to_polynomial(sys);
            std::vector<int> z(static_cast<std::size_t>(n));
            for (int& b : z) b = static_cast<int>(rng() & 1u);
            CubePoint p(n, +1);
            for (int i = 1; i <= n; ++i)
                if (z[static_cast<std::size_t>(i - 1)]) p.set_sign(i, -1);
            const long long direct = satisfied_count(sys, z);
            const long long via =
                (static_cast<long long>(sys.equations.size()) +
                 std::llround(f.evaluate(p).real())) / 2;
            s.check(direct == via, "encoding identity: counts agree");
            Z2System back = polynomial_to_system(f);
            s.check(serialize_system(back) == serialize_system(polynomial_to_system(system_to_polynomial(back))),
                    "system round-trip is stable");
            SolveOptions so;
            so.epsilon = 0.4;
            SolveResult res = solve_z2(sys, so);
            s.check(res.satisfied == satisfied_count(sys, res.assignment),
                    "reported satisfied count is exact");
            const double truth = exact_partition(f, res.lambda).real();
            bool cert_ok = true;
            for (const BoundCertificate& c : res.certificates)
                if (c.hypotheses_met) cert_ok = cert_ok && truth >= c.value * (1.0 - 1e-9);
            s.check(cert_ok, "applicable certificates really bound the partition function");
        }
        s.close(report, log);
    }

    return report;
}

}  // namespace cubepf
