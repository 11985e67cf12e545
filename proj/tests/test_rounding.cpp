#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "cubepf/exact.hpp"
#include "cubepf/instances.hpp"
#include "cubepf/rounding.hpp"
#include "support/test_helpers.hpp"

using cubepf::ConditioningTrace;
using cubepf::CubePolynomial;
using cubepf::RoundingOptions;

namespace {

// small real polynomial with a comfortable working disk
CubePolynomial gentle_poly(std::mt19937_64& rng, int n) {
    cubepf::PolyGenOptions o;
    o.n = n;
    o.terms = 4 + static_cast<int>(rng() % 5);
    o.max_degree = 3;
    o.complex_coeffs = false;
    o.zero_constant = false;
    return cubepf::random_polynomial(rng, o);
}

double safe_lambda(const CubePolynomial& f, double frac) {
    return frac * cubepf::disk_radii(f).working;
}

}  // namespace

TEST_CASE("exact conditioning lands at or above the log partition") {
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 15; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 9);
        const CubePolynomial f = gentle_poly(rng, n);
        const double lambda = safe_lambda(f, 0.3 + 0.6 * (rep % 3) / 3.0);
        const ConditioningTrace t = cubepf::round_to_point(f, lambda, 0.25);

        REQUIRE(t.steps.size() == static_cast<std::size_t>(n));
        const double fy = cubepf::greedy_value(t, f);
        const double log_mean = std::log(cubepf::exact_partition(f, lambda).real());
        // a maximum of two facets is never below their mean, step by step
        CHECK(fy >= log_mean / lambda - 1e-10);
        // every step was exact, so the certificate is the root log itself
        for (const auto& s : t.steps) CHECK(s.step_bound == 0.0);
        CHECK(testhelp::close(t.certified_lower_bound(), log_mean / lambda, 1e-10));
        CHECK(t.certified_lower_bound() <= fy + 1e-10);
        CHECK(fy <= cubepf::exact_max(f).value + 1e-12);
    }
}

TEST_CASE("taylor conditioning keeps the advertised guarantee") {
    std::mt19937_64 rng(72);
    RoundingOptions forced;
    forced.exact_threshold = 0;  // no exact fallback on any facet
    const double eps = 0.5;
    for (int rep = 0; rep < 4; ++rep) {
        const int n = 10 + static_cast<int>(rng() % 3);
        const CubePolynomial f = gentle_poly(rng, n);
        const double lambda = safe_lambda(f, 0.8);
        const ConditioningTrace t = cubepf::round_to_point(f, lambda, eps, forced);

        const double budget = eps / (2.0 * n);
        for (const auto& s : t.steps) {
            // the last facet has no free variables left: evaluating a point
            // is exact even with the threshold at zero
            if (s.variable == 1)
                CHECK(s.step_bound == 0.0);
            else
                CHECK(s.step_bound > 0.0);
            CHECK(s.step_bound <= budget);
        }
        const double fy = cubepf::greedy_value(t, f);
        const double mean = cubepf::exact_partition(f, lambda).real();
        CHECK(std::exp(lambda * fy) >= (1.0 - eps) * mean);
        // the trace certificate holds without consulting the oracle
        CHECK(fy >= t.certified_lower_bound() - 1e-10);
        CHECK(t.certified_lower_bound() >= std::log((1.0 - eps) * mean) / lambda - 1e-10);
    }
}

TEST_CASE("rounding is deterministic and serializes stably") {
    std::mt19937_64 rng(73);
    const CubePolynomial f = gentle_poly(rng, 7);
    const double lambda = safe_lambda(f, 0.5);
    const ConditioningTrace a = cubepf::round_to_point(f, lambda, 0.25);
    const ConditioningTrace b = cubepf::round_to_point(f, lambda, 0.25);
    CHECK(a.serialize() == b.serialize());

    const std::string text = a.serialize();
    CHECK(text.find("n = 7\n") != std::string::npos);
    CHECK(text.find("lambda = ") != std::string::npos);
    CHECK(text.find("epsilon = 0.25\n") != std::string::npos);
    CHECK(text.find("root_estimate = ") != std::string::npos);
    CHECK(text.find("fingerprint = ") != std::string::npos);
    // conditioning runs from the highest variable down
    CHECK(text.find("step=1 var=7 sign=") != std::string::npos);
    CHECK(text.find("step=7 var=1 sign=") != std::string::npos);
    CHECK(text.find(" bound=0\n") != std::string::npos);  // exact facets
    CHECK(text.find("point=") != std::string::npos);
    // the printed point matches the trace
    std::string rendered = "point=";
    for (int v = 1; v <= 7; ++v) rendered += a.point.sign(v) > 0 ? " +1" : " -1";
    CHECK(text.find(rendered + "\n") != std::string::npos);
}

TEST_CASE("flipping a variable flips the chosen sign") {
    std::mt19937_64 rng(74);
    const int n = 6;
    const CubePolynomial f = gentle_poly(rng, n);
    const double lambda = safe_lambda(f, 0.5);
    const int i = 3;
    const CubePolynomial g = f.flip_variable(i);

    const ConditioningTrace tf = cubepf::round_to_point(f, lambda, 0.25);
    const ConditioningTrace tg = cubepf::round_to_point(g, lambda, 0.25);
    // facet estimates at the flipped coordinate swap roles
    const auto& sf = tf.steps[static_cast<std::size_t>(n - i)];
    const auto& sg = tg.steps[static_cast<std::size_t>(n - i)];
    REQUIRE(sf.variable == i);
    REQUIRE(sg.variable == i);
    CHECK(sf.est_plus == sg.est_minus);
    CHECK(sf.est_minus == sg.est_plus);
    // the achieved value is invariant
    CHECK(cubepf::greedy_value(tf, f) == cubepf::greedy_value(tg, g));
}

TEST_CASE("ties condition toward plus one") {
    const std::vector<int> i12{1, 2};
    const CubePolynomial f = CubePolynomial::monomial(2, i12, 1.0);
    const ConditioningTrace t = cubepf::round_to_point(f, 0.2, 0.5);
    CHECK(t.point.sign(1) == +1);
    CHECK(t.point.sign(2) == +1);
    CHECK(cubepf::greedy_value(t, f) == 1.0);
}

TEST_CASE("constant polynomials round to the all plus point") {
    const CubePolynomial f = CubePolynomial::constant(3, 1.25);
    const ConditioningTrace t = cubepf::round_to_point(f, 0.3, 0.5);
    for (int v = 1; v <= 3; ++v) CHECK(t.point.sign(v) == +1);
    CHECK(testhelp::close(t.certified_lower_bound(), 1.25, 1e-13));
}

TEST_CASE("rounding validates its inputs") {
    std::mt19937_64 rng(75);
    const CubePolynomial f = gentle_poly(rng, 6);
    const double wr = cubepf::disk_radii(f).working;

    CHECK_THROWS_AS(cubepf::round_to_point(f, -0.1, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(cubepf::round_to_point(f, 0.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(cubepf::round_to_point(f, 0.5 * wr, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cubepf::round_to_point(f, 0.5 * wr, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(cubepf::round_to_point(f, wr * 1.01, 0.25), std::domain_error);

    const std::vector<int> i1{1};
    CHECK_THROWS_AS(
        cubepf::round_to_point(CubePolynomial::monomial(2, i1, std::complex<double>(0, 1)), 0.1, 0.25),
        std::invalid_argument);

    // per-step budget eps/(2n) must beat e^{-n} when the Taylor path can run
    RoundingOptions forced;
    forced.exact_threshold = 0;
    const CubePolynomial small = gentle_poly(rng, 4);
    try {
        cubepf::round_to_point(small, 0.3 * cubepf::disk_radii(small).working, 0.1, forced);
        FAIL("expected a budget refusal");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("per-step budget") != std::string::npos);
    }
    // the same call with exact facets allowed goes through
    CHECK_NOTHROW(cubepf::round_to_point(small, 0.3 * cubepf::disk_radii(small).working, 0.1));
}

TEST_CASE("greedy value cross-checks the trace against the polynomial") {
    std::mt19937_64 rng(76);
    const CubePolynomial f = gentle_poly(rng, 6);
    const ConditioningTrace t = cubepf::round_to_point(f, safe_lambda(f, 0.5), 0.25);
    CHECK(cubepf::greedy_value(t, f) == f.evaluate(t.point).real());

    const CubePolynomial other = f + CubePolynomial::sum_of_variables(6);
    CHECK_THROWS_AS(cubepf::greedy_value(t, other), std::invalid_argument);

    ConditioningTrace wrong_n = t;
    wrong_n.n = 5;
    CHECK_THROWS_AS(cubepf::greedy_value(wrong_n, f), std::invalid_argument);
}
