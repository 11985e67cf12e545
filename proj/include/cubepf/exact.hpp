#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "polynomial.hpp"

namespace cubepf {

struct OracleOptions {
    // Hard refusal threshold for 2^n enumeration; raising it is an explicit
    // opt-in (CUBEPF_ORACLE_CAP or --oracle-cap at the CLI).
    int cap = 24;
    // threads > 1 switches to the blocked enumeration with a fixed pairwise
    // reduction tree; results are then reproducible for any thread count but
    // may differ in the last bits from the single-threaded order.
    int threads = 1;
};

struct MaxResult {
    double value = 0.0;
    CubePoint point;
};

namespace detail {

// Shared scaffolding for one subcube walk: per-term sign state plus the
// per-variable term lists that make a Gray-code flip O(#occurrences).
template <class V>
struct GrayWalk {
    const CubePolynomial& f;
    int nfree;  // variables 1..nfree are enumerated; the rest must not occur
    std::vector<V> coeff;
    std::vector<std::int8_t> sign;
    std::vector<std::vector<std::uint32_t>> var_terms;

    GrayWalk(const CubePolynomial& poly, int nfree_) : f(poly), nfree(nfree_) {
        const auto& terms = f.terms();
        coeff.reserve(terms.size());
        for (const Term& t : terms) {
            if constexpr (std::is_same_v<V, double>)
                coeff.push_back(t.coeff.real());
            else
                coeff.push_back(t.coeff);
        }
        sign.assign(terms.size(), 1);
        var_terms.assign(static_cast<std::size_t>(nfree), {});
        for (std::size_t j = 0; j < terms.size(); ++j) {
            terms[j].support.for_each_index([&](int i) {
                if (i > nfree)
                    throw std::logic_error("enumeration prefix excludes an occurring variable");
                var_terms[static_cast<std::size_t>(i - 1)].push_back(static_cast<std::uint32_t>(j));
            });
        }
    }

    V full_value() const {
        V v{};
        for (std::size_t j = 0; j < coeff.size(); ++j) v += sign[j] > 0 ? coeff[j] : -coeff[j];
        return v;
    }

    void flip(int var, V& value) {
        for (std::uint32_t j : var_terms[static_cast<std::size_t>(var - 1)]) {
            V c = sign[j] > 0 ? coeff[j] : -coeff[j];
            value -= 2.0 * c;
            sign[j] = static_cast<std::int8_t>(-sign[j]);
        }
    }
};

// Walks one block of the prefix subcube in binary-reflected Gray order and
// calls visit(value, gray) per point; gray bit i-1 set means x_i = -1.
// block fixes the top block_bits variables of the prefix (bit j of block ->
// variable nfree-block_bits+1+j is -1). The incremental value is refreshed
// from the exact sign state every 2^16 steps to keep accumulated rounding
// well under the documented 1e-10 oracle tolerance.
template <class V, class Visit>
void walk_block(GrayWalk<V>& w, std::uint64_t block, int block_bits, Visit&& visit) {
    const int low = w.nfree - block_bits;
    // reset sign state to the block's base point (low vars all +1)
    std::fill(w.sign.begin(), w.sign.end(), std::int8_t{1});
    std::uint64_t gray_high = 0;
    for (int j = 0; j < block_bits; ++j) {
        if ((block >> j) & 1u) {
            int var = low + 1 + j;
            gray_high |= std::uint64_t{1} << (var - 1);
            for (std::uint32_t t : w.var_terms[static_cast<std::size_t>(var - 1)])
                w.sign[t] = static_cast<std::int8_t>(-w.sign[t]);
        }
    }
    V value = w.full_value();
    std::uint64_t gray_low = 0;
    const std::uint64_t steps = std::uint64_t{1} << low;
    for (std::uint64_t t = 0;;) {
        visit(value, gray_high | gray_low);
        if (++t == steps) break;
        int p = std::countr_zero(t);
        gray_low ^= std::uint64_t{1} << p;
        w.flip(p + 1, value);
        if ((t & 0xffffu) == 0) value = w.full_value();
    }
}

// Runs one accumulator per block and combines them over a fixed pairwise
// tree. Acc needs: run(walk, block, block_bits) and static combine(a, b).
template <class V, class Acc>
Acc blocked_enumerate(const CubePolynomial& f, int nfree, const Acc& proto, int threads) {
    if (nfree > 62)
        throw std::domain_error("2^n enumeration over " + std::to_string(nfree) +
                                " variables is not representable");
    const int block_bits = threads > 1 ? std::min(nfree, 6) : 0;
    const std::uint64_t blocks = std::uint64_t{1} << block_bits;
    std::vector<Acc> part(static_cast<std::size_t>(blocks), proto);
    if (threads <= 1 || blocks == 1) {
        GrayWalk<V> w(f, nfree);
        for (std::uint64_t b = 0; b < blocks; ++b) part[b].run(w, b, block_bits);
    } else {
        std::atomic<std::uint64_t> next{0};
        auto worker = [&] {
            GrayWalk<V> w(f, nfree);
            for (std::uint64_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1))
                part[b].run(w, b, block_bits);
        };
        std::vector<std::thread> pool;
        int nt = std::min<int>(threads, static_cast<int>(blocks));
        pool.reserve(static_cast<std::size_t>(nt));
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    // fixed reduction tree: result is independent of the thread count
    for (std::uint64_t stride = 1; stride < blocks; stride *= 2)
        for (std::uint64_t i = 0; i + stride < blocks; i += 2 * stride)
            part[i] = Acc::combine(part[i], part[i + stride]);
    return part[0];
}

// Two-level sum: per-chunk partials bound the worst-case rounding error by
// ~(2^16 + #chunks) * eps instead of 2^n * eps.
template <class S>
struct ChunkedSum {
    S total{};
    S chunk{};
    std::uint64_t in_chunk = 0;
    void add(S v) {
        chunk += v;
        if (++in_chunk == 0x10000u) {
            total += chunk;
            chunk = S{};
            in_chunk = 0;
        }
    }
    S value() const { return total + chunk; }
};

template <class V, class S>
struct PartitionAcc {
    S lambda{};
    ChunkedSum<S> sum;
    void run(GrayWalk<V>& w, std::uint64_t block, int block_bits) {
        walk_block(w, block, block_bits,
                   [&](V v, std::uint64_t) { sum.add(std::exp(lambda * v)); });
    }
    static PartitionAcc combine(PartitionAcc a, const PartitionAcc& b) {
        a.sum.chunk = a.sum.value() + b.sum.value();
        a.sum.total = S{};
        a.sum.in_chunk = 0;
        return a;
    }
};

template <class V>
struct MomentsAcc {
    int kmax = 0;
    std::vector<ChunkedSum<V>> sums;  // sums[k-1] accumulates f^k
    void run(GrayWalk<V>& w, std::uint64_t block, int block_bits) {
        sums.resize(static_cast<std::size_t>(kmax));
        walk_block(w, block, block_bits, [&](V v, std::uint64_t) {
            V p = v;
            for (int k = 0; k < kmax; ++k) {
                sums[static_cast<std::size_t>(k)].add(p);
                p *= v;
            }
        });
    }
    static MomentsAcc combine(MomentsAcc a, const MomentsAcc& b) {
        a.sums.resize(static_cast<std::size_t>(a.kmax));
        for (std::size_t k = 0; k < a.sums.size(); ++k) {
            auto bv = k < b.sums.size() ? b.sums[k].value() : V{};
            a.sums[k].chunk = a.sums[k].value() + bv;
            a.sums[k].total = V{};
            a.sums[k].in_chunk = 0;
        }
        return a;
    }
};

inline CubePoint point_from_gray(std::uint64_t gray, int nfree, int n) {
    CubePoint p(n, +1);
    for (int i = 1; i <= nfree; ++i)
        if ((gray >> (i - 1)) & 1u) p.set_sign(i, -1);
    return p;
}

// +1 before -1, coordinate 1 most significant.
inline bool lex_less(const CubePoint& a, const CubePoint& b) {
    for (int i = 1; i <= a.dimension(); ++i) {
        if (a.sign(i) != b.sign(i)) return a.sign(i) > b.sign(i);
    }
    return false;
}

struct MaxAcc {
    int nfree = 0;
    int n = 0;
    bool seen = false;
    double best = 0.0;
    std::uint64_t best_gray = 0;
    void run(GrayWalk<double>& w, std::uint64_t block, int block_bits) {
        walk_block(w, block, block_bits, [&](double v, std::uint64_t gray) {
            if (!seen || v > best) {
                seen = true;
                best = v;
                best_gray = gray;
            } else if (v == best && gray_lex_less(gray)) {
                best_gray = gray;
            }
        });
    }
    bool gray_lex_less(std::uint64_t gray) const {
        // +1 (bit 0) precedes -1 (bit 1) coordinate by coordinate
        for (int i = 0; i < nfree; ++i) {
            unsigned a = (gray >> i) & 1u, b = (best_gray >> i) & 1u;
            if (a != b) return a < b;
        }
        return false;
    }
    static MaxAcc combine(MaxAcc a, const MaxAcc& b) {
        if (!b.seen) return a;
        if (!a.seen || b.best > a.best) return b;
        if (b.best == a.best && a.gray_lex_less(b.best_gray)) a.best_gray = b.best_gray;
        return a;
    }
};

inline void check_cap(const CubePolynomial& f, const OracleOptions& opts) {
    if (f.variable_count() > opts.cap)
        throw std::domain_error("n = " + std::to_string(f.variable_count()) +
                                " exceeds the exhaustive enumeration cap " + std::to_string(opts.cap) +
                                "; raise the cap explicitly to force a 2^n walk");
}

// E e^{lambda f} over the subcube of the first nfree variables (equal to the
// full-cube average whenever variables above nfree do not occur in f).
inline std::complex<double> partition_over_prefix(const CubePolynomial& f, std::complex<double> lambda,
                                                  int nfree, int threads) {
    const double scale = std::ldexp(1.0, -nfree);
    if (f.is_real() && lambda.imag() == 0.0) {
        PartitionAcc<double, double> proto;
        proto.lambda = lambda.real();
        auto acc = blocked_enumerate<double>(f, nfree, proto, threads);
        return acc.sum.value() * scale;
    }
    PartitionAcc<std::complex<double>, std::complex<double>> proto;
    proto.lambda = lambda;
    auto acc = blocked_enumerate<std::complex<double>>(f, nfree, proto, threads);
    return acc.sum.value() * scale;
}

}  // namespace detail

// 2^-n sum over the whole cube of e^{lambda f(x)}; refuses n beyond the cap.
inline std::complex<double> exact_partition(const CubePolynomial& f, std::complex<double> lambda,
                                            const OracleOptions& opts = {}) {
    detail::check_cap(f, opts);
    return detail::partition_over_prefix(f, lambda, f.variable_count(), opts.threads);
}

// E f^k for k = 1..kmax in one walk.
inline std::vector<std::complex<double>> exact_moments(const CubePolynomial& f, int kmax,
                                                       const OracleOptions& opts = {}) {
    if (kmax < 1) throw std::invalid_argument("moment order must be at least 1");
    detail::check_cap(f, opts);
    const int n = f.variable_count();
    const double scale = std::ldexp(1.0, -n);
    std::vector<std::complex<double>> out(static_cast<std::size_t>(kmax));
    if (f.is_real()) {
        detail::MomentsAcc<double> proto;
        proto.kmax = kmax;
        auto acc = detail::blocked_enumerate<double>(f, n, proto, opts.threads);
        for (int k = 0; k < kmax; ++k) out[static_cast<std::size_t>(k)] = acc.sums[static_cast<std::size_t>(k)].value() * scale;
    } else {
        detail::MomentsAcc<std::complex<double>> proto;
        proto.kmax = kmax;
        auto acc = detail::blocked_enumerate<std::complex<double>>(f, n, proto, opts.threads);
        for (int k = 0; k < kmax; ++k) out[static_cast<std::size_t>(k)] = acc.sums[static_cast<std::size_t>(k)].value() * scale;
    }
    return out;
}

inline std::complex<double> exact_moment(const CubePolynomial& f, int k, const OracleOptions& opts = {}) {
    return exact_moments(f, k, opts).back();
}

// Global maximum of a real polynomial; ties resolve to the lexicographically
// smallest point (+1 before -1, coordinate 1 most significant), so the result
// does not depend on enumeration order.
inline MaxResult exact_max(const CubePolynomial& f, const OracleOptions& opts = {}) {
    if (!f.is_real()) throw std::invalid_argument("maximization requires a real polynomial");
    detail::check_cap(f, opts);
    const int n = f.variable_count();
    detail::MaxAcc proto;
    proto.nfree = n;
    proto.n = n;
    auto acc = detail::blocked_enumerate<double>(f, n, proto, opts.threads);
    MaxResult r;
    r.value = acc.best;
    r.point = detail::point_from_gray(acc.best_gray, n, n);
    return r;
}

}  // namespace cubepf
