#include <charconv>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cubepf/errors.hpp"
#include "cubepf/exact.hpp"
#include "cubepf/format.hpp"
#include "cubepf/poly_io.hpp"
#include "cubepf/rounding.hpp"
#include "cubepf/selftest.hpp"
#include "cubepf/taylor.hpp"
#include "cubepf/z2.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 success, 1 internal failure (bad input file, I/O), 2 violated
// mathematical hypothesis (cap, disk, epsilon, guard), 64 usage.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitUsage = 64;

// Fixed 17-significant-digit rendering: always enough to reproduce the bits.
std::string digits17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::complex<double> parse_lambda(const std::string& text) {
    const auto comma = text.find(',');
    double re = 0.0, im = 0.0;
    bool ok = cubepf::parse_double(text.substr(0, comma), re);
    if (comma != std::string::npos) ok = ok && cubepf::parse_double(text.substr(comma + 1), im);
    if (!ok) throw std::invalid_argument("bad --lambda value '" + text + "' (expected re[,im])");
    return {re, im};
}

cubepf::CubePolynomial load_polynomial(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return cubepf::parse_polynomial(in);
}

cubepf::Z2System load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return cubepf::parse_system(in);
}

// Environment defaults; explicit flags always win. A malformed value is a
// usage error, not something to ignore silently.
long long env_int(const char* name, long long fallback) {
    const char* v = std::getenv(name);
    if (!v) return fallback;
    long long out = 0;
    if (!cubepf::parse_int(v, out))
        throw CLI::ValidationError(std::string(name) + " is not an integer: '" + v + "'");
    return out;
}

int env_oracle_cap(int fallback) {
    return static_cast<int>(env_int("CUBEPF_ORACLE_CAP", fallback));
}

std::uint64_t env_max_terms(std::uint64_t fallback) {
    return static_cast<std::uint64_t>(env_int("CUBEPF_MAX_TERMS", static_cast<long long>(fallback)));
}

json certificate_json(const cubepf::BoundCertificate& c) {
    json j;
    j["id"] = c.id;
    j["applicable"] = c.hypotheses_met;
    j["log_value"] = c.log_value;
    j["value"] = c.value;
    json params = json::object();
    for (const cubepf::BoundParameter& p : c.parameters) params[p.name] = p.value;
    j["parameters"] = params;
    j["unmet"] = c.unmet;
    return j;
}

void print_certificate(std::ostream& out, const cubepf::BoundCertificate& c) {
    out << "certificate = " << c.id << "\n";
    out << "  applicable = " << (c.hypotheses_met ? "true" : "false") << "\n";
    for (const cubepf::BoundParameter& p : c.parameters)
        out << "  " << p.name << " = " << cubepf::format_double(p.value) << "\n";
    out << "  log_value = " << cubepf::format_double(c.log_value) << "\n";
    out << "  value = " << cubepf::format_double(c.value) << "\n";
    for (const std::string& r : c.unmet) out << "  unmet = " << r << "\n";
}

struct ExactArgs {
    std::string file;
    std::string lambda = "0";
    int cap = env_oracle_cap(24);
    int threads = 1;
    bool as_json = false;
};

int cmd_exact(const ExactArgs& a) {
    const cubepf::CubePolynomial f = load_polynomial(a.file);
    cubepf::OracleOptions opts;
    opts.cap = a.cap;
    opts.threads = a.threads;
    const std::complex<double> value = cubepf::exact_partition(f, parse_lambda(a.lambda), opts);
    if (a.as_json) {
        json j;
        j["partition_re"] = value.real();
        j["partition_im"] = value.imag();
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "partition = " << digits17(value.real()) << " " << digits17(value.imag())
                  << "\n";
    }
    return kExitOk;
}

struct ApproxArgs {
    std::string file;
    std::string lambda;
    double epsilon = 0.1;
    int m = 0;  // 0 = pick from epsilon
    bool force = false;
    double prune = 0.0;
    std::uint64_t max_terms = env_max_terms(100'000'000);
    bool as_json = false;
};

int cmd_approx(const ApproxArgs& a) {
    const cubepf::CubePolynomial f = load_polynomial(a.file);
    const std::complex<double> lambda = parse_lambda(a.lambda);
    cubepf::ApproxOptions opts;
    opts.force = a.force;
    opts.prune = a.prune;
    opts.max_terms = a.max_terms;
    const cubepf::PartitionEstimate est =
        a.m > 0 ? cubepf::approx_partition_order(f, lambda, a.m, opts)
                : cubepf::approx_partition(f, lambda, a.epsilon, opts);
    if (a.as_json) {
        json j;
        j["lambda_re"] = est.lambda.real();
        j["lambda_im"] = est.lambda.imag();
        j["m"] = est.order;
        j["t_m_re"] = est.taylor_value.real();
        j["t_m_im"] = est.taylor_value.imag();
        j["estimate_re"] = est.estimate.real();
        j["estimate_im"] = est.estimate.imag();
        j["error_bound"] = est.error_bound;
        j["within_disk"] = est.within_disk;
        j["prune"] = est.prune;
        j["term_counts"] = est.term_counts;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "lambda = " << cubepf::format_complex(est.lambda) << "\n";
        std::cout << "m = " << est.order << "\n";
        std::cout << "t_m = " << cubepf::format_complex(est.taylor_value) << "\n";
        std::cout << "estimate_re = " << cubepf::format_double(est.estimate.real()) << "\n";
        std::cout << "estimate_im = " << cubepf::format_double(est.estimate.imag()) << "\n";
        std::cout << "error_bound = " << cubepf::format_double(est.error_bound) << "\n";
        std::cout << "within_disk = " << (est.within_disk ? "true" : "false") << "\n";
        if (est.prune != 0.0)
            std::cout << "prune = " << cubepf::format_double(est.prune) << "\n";
    }
    return kExitOk;
}

struct RoundArgs {
    std::string file;
    std::string lambda;
    double epsilon = 0.25;
    int exact_threshold = 20;
    int threads = 1;
    double prune = 0.0;
    std::uint64_t max_terms = env_max_terms(100'000'000);
    bool as_json = false;
};

int cmd_round(const RoundArgs& a) {
    const cubepf::CubePolynomial f = load_polynomial(a.file);
    const std::complex<double> lambda = parse_lambda(a.lambda);
    if (lambda.imag() != 0.0)
        throw std::invalid_argument("rounding requires a real lambda");
    cubepf::RoundingOptions opts;
    opts.exact_threshold = a.exact_threshold;
    opts.threads = a.threads;
    opts.prune = a.prune;
    opts.max_terms = a.max_terms;
    const cubepf::ConditioningTrace trace =
        cubepf::round_to_point(f, lambda.real(), a.epsilon, opts);
    const double value = cubepf::greedy_value(trace, f);
    const double bound = trace.certified_lower_bound();
    if (a.as_json) {
        json j;
        j["n"] = trace.n;
        j["lambda"] = trace.lambda;
        j["epsilon"] = trace.epsilon;
        j["root_estimate"] = trace.root_estimate;
        char fp[32];
        std::snprintf(fp, sizeof(fp), "%016llx",
                      static_cast<unsigned long long>(trace.fingerprint));
        j["fingerprint"] = fp;
        json steps = json::array();
        for (const cubepf::ConditioningStep& s : trace.steps) {
            json step;
            step["variable"] = s.variable;
            step["sign"] = s.sign;
            step["est_plus"] = s.est_plus;
            step["est_minus"] = s.est_minus;
            step["bound"] = s.step_bound;
            steps.push_back(step);
        }
        j["steps"] = steps;
        std::vector<int> signs;
        for (int v = 1; v <= trace.n; ++v) signs.push_back(trace.point.sign(v));
        j["point"] = signs;
        j["value"] = value;
        j["certified_bound"] = bound;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << trace.serialize();
        std::cout << "value = " << cubepf::format_double(value) << "\n";
        std::cout << "certified_bound = " << cubepf::format_double(bound) << "\n";
    }
    return kExitOk;
}

struct SolveArgs {
    std::string file;
    double epsilon = 0.25;
    std::string lambda;  // optional override
    int exact_threshold = 20;
    int oracle_cap = env_oracle_cap(24);
    int threads = 1;
    std::uint64_t max_terms = env_max_terms(100'000'000);
    bool as_json = false;
};

int cmd_solve_z2(const SolveArgs& a) {
    const cubepf::Z2System sys = load_system(a.file);
    cubepf::SolveOptions opts;
    opts.epsilon = a.epsilon;
    opts.oracle_cap = a.oracle_cap;
    opts.threads = a.threads;
    opts.rounding.exact_threshold = a.exact_threshold;
    opts.rounding.max_terms = a.max_terms;
    cubepf::SolveResult res;
    if (a.lambda.empty()) {
        res = cubepf::solve_z2(sys, opts);
    } else {
        // An explicit lambda bypasses the paper-derived choice: rebuild the
        // pipeline with the requested value.
        const cubepf::CubePolynomial f = cubepf::system_to_polynomial(sys);
        const double lam = parse_lambda(a.lambda).real();
        cubepf::RoundingOptions ro = opts.rounding;
        ro.threads = a.threads;
        res.lambda = lam;
        res.trace = cubepf::round_to_point(f, lam, a.epsilon, ro);
        res.assignment.assign(static_cast<std::size_t>(sys.n), 0);
        for (int i = 1; i <= sys.n; ++i)
            res.assignment[static_cast<std::size_t>(i - 1)] = res.trace.point.sign(i) > 0 ? 0 : 1;
        res.value = std::llround(f.evaluate(res.trace.point).real());
        res.satisfied = (static_cast<long long>(sys.equations.size()) + res.value) / 2;
        double max_lower = static_cast<double>(res.value);
        if (sys.n <= a.oracle_cap && sys.n <= 62) {
            cubepf::OracleOptions oo;
            oo.cap = a.oracle_cap;
            oo.threads = a.threads;
            cubepf::MaxResult mx = cubepf::exact_max(f, oo);
            res.max_exact = true;
            res.max_value = std::llround(mx.value);
            max_lower = mx.value;
        }
        const double delta = std::max(0.0, max_lower) / static_cast<double>(f.term_count());
        const long long kmax = cubepf::occurrence_profile(f).k_max;
        res.certificates.push_back(cubepf::advantage_bound(f, delta, lam));
        res.certificates.push_back(cubepf::near_max_bound(
            f, static_cast<int>(std::max<long long>(kmax, 3)), max_lower, lam));
        res.certificates.push_back(cubepf::cosh_product_bound(f, lam));
        res.certificates.push_back(cubepf::signed_count_bound(
            f, static_cast<int>(std::max<long long>(kmax, 1)), lam));
        res.certificates.push_back(cubepf::disjoint_negatives_bound(f, lam));
        res.procedural_bound = res.trace.certified_lower_bound();
    }
    if (a.as_json) {
        json j;
        j["z"] = res.assignment;
        j["satisfied"] = res.satisfied;
        j["value"] = res.value;
        j["lambda"] = res.lambda;
        j["max_exact"] = res.max_exact;
        if (res.max_exact) j["max_value"] = res.max_value;
        j["procedural_bound"] = res.procedural_bound;
        if (std::isnan(res.certificate_bound))
            j["certificate_bound"] = nullptr;
        else
            j["certificate_bound"] = res.certificate_bound;
        json certs = json::array();
        for (const cubepf::BoundCertificate& c : res.certificates)
            certs.push_back(certificate_json(c));
        j["certificates"] = certs;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "z =";
        for (int b : res.assignment) std::cout << " " << b;
        std::cout << "\n";
        std::cout << "satisfied = " << res.satisfied << "\n";
        std::cout << "value = " << res.value << "\n";
        std::cout << "lambda = " << cubepf::format_double(res.lambda) << "\n";
        std::cout << "max_exact = " << (res.max_exact ? "true" : "false") << "\n";
        if (res.max_exact) std::cout << "max_value = " << res.max_value << "\n";
        if (!res.trace.steps.empty())
            std::cout << "procedural_bound = " << cubepf::format_double(res.procedural_bound)
                      << "\n";
        if (!std::isnan(res.certificate_bound))
            std::cout << "certificate_bound = " << cubepf::format_double(res.certificate_bound)
                      << "\n";
        for (const cubepf::BoundCertificate& c : res.certificates)
            print_certificate(std::cout, c);
    }
    return kExitOk;
}

struct BoundsArgs {
    std::string file;
    std::string lambda;  // optional; default follows the solver's rule
    double delta = -1.0;  // <0 = derive (exact max when feasible, else 0)
    int k = 0;            // 0 = derive from the occurrence profile
    int oracle_cap = env_oracle_cap(24);
    int threads = 1;
    bool as_json = false;
};

int cmd_bounds(const BoundsArgs& a) {
    const cubepf::Z2System sys = load_system(a.file);
    const cubepf::CubePolynomial f = cubepf::system_to_polynomial(sys);
    if (f.term_count() == 0)
        throw std::domain_error("all equations cancel; no bounds to report");
    const cubepf::OccurrenceProfile prof = cubepf::occurrence_profile(f);
    const int d = f.degree();
    const long long kmax = prof.k_max;
    double lambda;
    if (a.lambda.empty()) {
        lambda = kmax <= 4
                     ? 1.0 / (8.0 * std::sqrt(static_cast<double>(d)))
                     : 1.0 / (2.0 * static_cast<double>(kmax) * std::sqrt(static_cast<double>(d)));
    } else {
        lambda = parse_lambda(a.lambda).real();
    }

    double delta = 0.0, max_lower = 0.0;
    std::string delta_source = "none";
    if (a.delta >= 0.0) {
        delta = a.delta;
        max_lower = delta * static_cast<double>(f.term_count());
        delta_source = "flag";
    } else if (sys.n <= a.oracle_cap && sys.n <= 62) {
        cubepf::OracleOptions oo;
        oo.cap = a.oracle_cap;
        oo.threads = a.threads;
        max_lower = cubepf::exact_max(f, oo).value;
        delta = std::max(0.0, max_lower) / static_cast<double>(f.term_count());
        delta_source = "exact-max";
    }

    const int k_near = a.k > 0 ? a.k : static_cast<int>(std::max<long long>(kmax, 3));
    const int k_count = a.k > 0 ? a.k : static_cast<int>(std::max<long long>(kmax, 1));
    std::vector<cubepf::BoundCertificate> certs;
    certs.push_back(cubepf::advantage_bound(f, delta, lambda));
    certs.push_back(cubepf::near_max_bound(f, k_near, max_lower, lambda));
    certs.push_back(cubepf::cosh_product_bound(f, lambda));
    certs.push_back(cubepf::signed_count_bound(f, k_count, lambda));
    certs.push_back(cubepf::disjoint_negatives_bound(f, lambda));

    if (a.as_json) {
        json j;
        j["n"] = sys.n;
        j["equations"] = sys.equations.size();
        j["terms"] = f.term_count();
        j["degree"] = d;
        j["k_max"] = kmax;
        j["lambda"] = lambda;
        j["delta"] = delta;
        j["delta_source"] = delta_source;
        json cj = json::array();
        for (const cubepf::BoundCertificate& c : certs) cj.push_back(certificate_json(c));
        j["certificates"] = cj;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "n = " << sys.n << "\n";
        std::cout << "equations = " << sys.equations.size() << "\n";
        std::cout << "terms = " << f.term_count() << "\n";
        std::cout << "degree = " << d << "\n";
        std::cout << "k_max = " << kmax << "\n";
        std::cout << "lambda = " << cubepf::format_double(lambda) << "\n";
        std::cout << "delta = " << cubepf::format_double(delta) << "\n";
        std::cout << "delta_source = " << delta_source << "\n";
        for (const cubepf::BoundCertificate& c : certs) print_certificate(std::cout, c);
    }
    return kExitOk;
}

struct SelftestArgs {
    std::string tier = "small";
    std::uint64_t seed = 1;
    bool as_json = false;
};

int cmd_selftest(const SelftestArgs& a) {
    if (a.as_json) {
        const cubepf::SelftestReport rep = cubepf::run_selftests(a.tier, a.seed, nullptr);
        json j;
        j["tier"] = a.tier;
        j["seed"] = a.seed;
        j["ok"] = rep.ok;
        json suites = json::array();
        for (const cubepf::SelftestSuite& s : rep.suites) {
            json sj;
            sj["name"] = s.name;
            sj["checks"] = s.checks;
            sj["failures"] = s.failures;
            if (!s.first_failure.empty()) sj["first_failure"] = s.first_failure;
            suites.push_back(sj);
        }
        j["suites"] = suites;
        std::cout << j.dump() << "\n";
        return rep.ok ? kExitOk : kExitFailure;
    }
    const cubepf::SelftestReport rep = cubepf::run_selftests(a.tier, a.seed, &std::cout);
    std::cout << "selftest = " << (rep.ok ? "pass" : "fail") << "\n";
    return rep.ok ? kExitOk : kExitFailure;
}

int run(int argc, char** argv) {
    CLI::App app{"Partition functions of multilinear polynomials on the Boolean cube"};
    app.require_subcommand(1);

    ExactArgs ea;
    CLI::App* exact = app.add_subcommand("exact", "Exact partition function by enumeration");
    exact->add_option("file", ea.file, "polynomial file")->required();
    exact->add_option("--lambda", ea.lambda, "re[,im] (default 0)");
    exact->add_option("--oracle-cap", ea.cap, "max variables for 2^n enumeration");
    exact->add_option("--threads", ea.threads, "worker threads");
    exact->add_flag("--json", ea.as_json, "machine-readable output");

    ApproxArgs aa;
    CLI::App* approx = app.add_subcommand("approx", "Taylor-interpolation estimate with bound");
    approx->add_option("file", aa.file, "polynomial file")->required();
    approx->add_option("--lambda", aa.lambda, "re[,im]")->required();
    approx->add_option("--epsilon", aa.epsilon, "target log-scale error (default 0.1)");
    approx->add_option("--m", aa.m, "fixed Taylor order (overrides --epsilon)");
    approx->add_flag("--force", aa.force, "proceed outside the working disk");
    approx->add_option("--prune", aa.prune, "coefficient prune threshold (default 0)");
    approx->add_option("--max-terms", aa.max_terms, "power-expansion term guard");
    approx->add_flag("--json", aa.as_json, "machine-readable output");

    RoundArgs ra;
    CLI::App* round = app.add_subcommand("round", "Round to a cube point by conditioning");
    round->add_option("file", ra.file, "polynomial file")->required();
    round->add_option("--lambda", ra.lambda, "positive real")->required();
    round->add_option("--epsilon", ra.epsilon, "guarantee slack in (0,1] (default 0.25)");
    round->add_option("--exact-threshold", ra.exact_threshold,
                      "free-variable count below which facets are enumerated (default 20)");
    round->add_option("--threads", ra.threads, "worker threads");
    round->add_option("--prune", ra.prune, "coefficient prune threshold (default 0)");
    round->add_option("--max-terms", ra.max_terms, "power-expansion term guard");
    round->add_flag("--json", ra.as_json, "machine-readable output");

    SolveArgs sa;
    CLI::App* solve = app.add_subcommand("solve-z2", "Maximize satisfied linear equations over Z2");
    solve->add_option("file", sa.file, "system file")->required();
    solve->add_option("--epsilon", sa.epsilon, "rounding slack (default 0.25)");
    solve->add_option("--lambda", sa.lambda, "override the derived lambda");
    solve->add_option("--exact-threshold", sa.exact_threshold,
                      "free-variable count below which facets are enumerated (default 20)");
    solve->add_option("--oracle-cap", sa.oracle_cap, "max variables for exact maximization");
    solve->add_option("--threads", sa.threads, "worker threads");
    solve->add_option("--max-terms", sa.max_terms, "power-expansion term guard");
    solve->add_flag("--json", sa.as_json, "machine-readable output");

    BoundsArgs ba;
    CLI::App* bounds = app.add_subcommand("bounds", "Certified lower bounds for a Z2 system");
    bounds->add_option("file", ba.file, "system file")->required();
    bounds->add_option("--lambda", ba.lambda, "override the derived lambda");
    bounds->add_option("--delta", ba.delta, "advantage ratio in [0,1] (default: derived)");
    bounds->add_option("--k", ba.k, "occurrence parameter override");
    bounds->add_option("--oracle-cap", ba.oracle_cap, "max variables for exact maximization");
    bounds->add_option("--threads", ba.threads, "worker threads");
    bounds->add_flag("--json", ba.as_json, "machine-readable output");

    SelftestArgs ta;
    CLI::App* selftest = app.add_subcommand("selftest", "Oracle-backed invariant suites");
    selftest->add_option("--tier", ta.tier, "small|large (default small)")
        ->check(CLI::IsMember({"small", "large"}));
    selftest->add_option("--seed", ta.seed, "instance generator seed (default 1)");
    selftest->add_flag("--json", ta.as_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (*exact) return cmd_exact(ea);
        if (*approx) return cmd_approx(aa);
        if (*round) return cmd_round(ra);
        if (*solve) return cmd_solve_z2(sa);
        if (*bounds) return cmd_bounds(ba);
        if (*selftest) return cmd_selftest(ta);
    } catch (const cubepf::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitHypothesis;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitHypothesis;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {  // env defaults can fail before parse
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
}
