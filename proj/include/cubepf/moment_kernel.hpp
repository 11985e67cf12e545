#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polynomial.hpp"

namespace cubepf {

struct MomentOptions {
    // Drop intermediate coefficients with |c| <= prune between powers
    // (0 disables). Any nonzero value trades accuracy for memory and is
    // recorded in the result.
    double prune = 0.0;
    // Abort (domain_error) if any intermediate power holds more distinct
    // supports than this. ~16-24 bytes per term of peak memory.
    std::uint64_t max_terms = 100'000'000;
};

struct MomentsResult {
    std::vector<std::complex<double>> values;  // values[k-1] = E f^k
    std::vector<std::uint64_t> term_counts;    // canonical term count of f^k
    double prune = 0.0;
};

namespace detail {

// --- F2 coordinatization -------------------------------------------------
//
// Every support occurring in f^k is a XOR of supports of f, i.e. lives in the
// F2-span of them. Re-encoding supports by their coordinates in a row-echelon
// basis of that span (rank <= min(n, N)) is a bijection, so term counts and
// the empty-support coefficient are unchanged while keys shrink from
// ceil(n/64) words to ceil(rank/64) — one word whenever n <= 64 or N <= 64.
// XOR of supports corresponds to XOR of coordinates, which is all the power
// iteration needs.
class SupportBasis {
public:
    explicit SupportBasis(std::uint32_t mask_words) : mask_words_(mask_words) {}

    // Phase 1: grow the basis. Rows keep pivot = highest set bit, stored in
    // descending pivot order, so one descending sweep fully reduces a vector.
    void insert(const MonomialSupport& s) {
        std::vector<std::uint64_t> v(s.words(), s.words() + mask_words_);
        reduce(v);
        int p = highest_bit(v);
        if (p < 0) return;  // dependent on earlier supports
        std::size_t pos = 0;
        while (pos < rows_.size() && pivots_[pos] > p) ++pos;
        rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(pos), std::move(v));
        pivots_.insert(pivots_.begin() + static_cast<std::ptrdiff_t>(pos), p);
    }

    int rank() const { return static_cast<int>(rows_.size()); }
    std::uint32_t key_words() const { return static_cast<std::uint32_t>((std::max(rank(), 1) + 63) / 64); }

    // Phase 2: coordinates w.r.t. the final rows; bit j <=> rows_[j].
    // Throws if s is outside the span (cannot happen for supports of f).
    void coords(const MonomialSupport& s, std::uint64_t* out) const {
        std::vector<std::uint64_t> v(s.words(), s.words() + mask_words_);
        std::fill(out, out + key_words(), 0);
        for (std::size_t j = 0; j < rows_.size(); ++j) {
            if (test_bit(v, pivots_[j])) {
                xor_into(v, rows_[j]);
                out[j >> 6] |= std::uint64_t{1} << (j & 63);
            }
        }
        if (highest_bit(v) >= 0)
            throw std::logic_error("support is outside the span of the polynomial's supports");
    }

private:
    static bool test_bit(const std::vector<std::uint64_t>& v, int b) {
        return (v[static_cast<std::size_t>(b) >> 6] >> (b & 63)) & 1u;
    }

    void xor_into(std::vector<std::uint64_t>& v, const std::vector<std::uint64_t>& r) const {
        for (std::uint32_t k = 0; k < mask_words_; ++k) v[k] ^= r[k];
    }

    int highest_bit(const std::vector<std::uint64_t>& v) const {
        for (std::uint32_t k = mask_words_; k-- > 0;)
            if (v[k]) return static_cast<int>(k * 64 + 63) - std::countl_zero(v[k]);
        return -1;
    }

    void reduce(std::vector<std::uint64_t>& v) const {
        for (std::size_t j = 0; j < rows_.size(); ++j)
            if (test_bit(v, pivots_[j])) xor_into(v, rows_[j]);
    }

    std::uint32_t mask_words_;
    std::vector<std::vector<std::uint64_t>> rows_;
    std::vector<int> pivots_;
};

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// --- combinatorial size bounds (double arithmetic, saturating) -----------

inline double saturating_cap() { return 9.0e18; }

// sum_{j <= k, j == k mod 2} C(N, j): supports reachable as a XOR of k
// supports out of N (pairs cancel, so only the parity class of k survives).
inline double subset_parity_bound(std::uint64_t N, int k) {
    double total = 0.0;
    double c = 1.0;  // C(N, j) running value
    for (std::uint64_t j = 0; j <= std::min<std::uint64_t>(k, N); ++j) {
        if ((k - static_cast<int>(j)) % 2 == 0) total += c;
        if (total > saturating_cap()) return saturating_cap();
        c *= static_cast<double>(N - j) / static_cast<double>(j + 1);
        if (c > saturating_cap()) c = saturating_cap();
    }
    return std::min(total, saturating_cap());
}

// sum_{j <= r} C(n, j): supports of degree at most r = min(k*d, n).
inline double ball_bound(int n, long long r) {
    r = std::min<long long>(r, n);
    double total = 0.0, c = 1.0;
    for (long long j = 0; j <= r; ++j) {
        total += c;
        if (total > saturating_cap()) return saturating_cap();
        c *= static_cast<double>(n - j) / static_cast<double>(j + 1);
        if (c > saturating_cap()) c = saturating_cap();
    }
    return std::min(total, saturating_cap());
}

inline double pow_saturating(double base, int k) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) {
        p *= base;
        if (p > saturating_cap()) return saturating_cap();
    }
    return p;
}

// --- fixed-point tables for the power iteration --------------------------
//
// Open addressing, linear probing, sized up front from a proven upper bound
// on the number of distinct keys, so no rehash ever happens and insertion
// order (sorted source x term index) fully determines every float result.
// The all-zero key doubles as the empty-slot sentinel; the empty support —
// the one key that is legitimately all-zero — accumulates in a side slot.

inline void term_guard_exceeded(std::uint64_t guard) {
    throw std::domain_error("symbolic power exceeds the term guard (" + std::to_string(guard) +
                            " distinct monomials); raise the guard to proceed");
}

// Single-word keys (rank <= 64): array-of-structs, one cache line per probe.
template <class Coeff>
class PowerTable1 {
public:
    void init(std::uint64_t limit, std::uint64_t guard) {
        guard_ = guard;
        limit_ = limit;
        cap_ = static_cast<std::size_t>(limit + limit / 2 + 16);
        slots_.assign(cap_, Slot{0, Coeff{}});
        count_ = 0;
        zero_used_ = false;
        zero_val_ = Coeff{};
    }

    void add(std::uint64_t key, Coeff c) {
        if (key == 0) {
            if (!zero_used_) {
                zero_used_ = true;
                bump();
            }
            zero_val_ += c;
            return;
        }
        std::size_t i = static_cast<std::size_t>(
            (static_cast<unsigned __int128>(splitmix64(key)) * cap_) >> 64);
        for (;;) {
            Slot& s = slots_[i];
            if (s.key == key) {
                s.val += c;
                return;
            }
            if (s.key == 0) {
                s.key = key;
                s.val = c;
                bump();
                return;
            }
            if (++i == cap_) i = 0;
        }
    }

    Coeff zero_value() const { return zero_used_ ? zero_val_ : Coeff{}; }

    std::uint64_t canonical_count() const {
        std::uint64_t c = zero_used_ && zero_val_ != Coeff{} ? 1 : 0;
        for (const Slot& s : slots_)
            if (s.key != 0 && s.val != Coeff{}) ++c;
        return c;
    }

    // Sorted nonzero (key, coeff) pairs, pruning |c| <= prune (prune > 0).
    std::vector<std::pair<std::uint64_t, Coeff>> compact_sorted(double prune) const {
        std::vector<std::pair<std::uint64_t, Coeff>> out;
        out.reserve(static_cast<std::size_t>(count_));
        auto keep = [&](Coeff v) {
            if (v == Coeff{}) return false;
            return prune <= 0.0 || std::abs(v) > prune;
        };
        if (zero_used_ && keep(zero_val_)) out.push_back({0, zero_val_});
        for (const Slot& s : slots_)
            if (s.key != 0 && keep(s.val)) out.push_back({s.key, s.val});
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    void release() {
        slots_.clear();
        slots_.shrink_to_fit();
    }

private:
    struct Slot {
        std::uint64_t key;
        Coeff val;
    };

    void bump() {
        if (++count_ > limit_) term_guard_exceeded(guard_);
    }

    std::vector<Slot> slots_;
    std::size_t cap_ = 0;
    std::uint64_t count_ = 0;
    std::uint64_t limit_ = 0;
    std::uint64_t guard_ = 0;
    bool zero_used_ = false;
    Coeff zero_val_{};
};

// Multi-word keys (rank > 64, i.e. n > 64 and N > 64): structure-of-arrays
// with runtime width. Same sentinel convention.
template <class Coeff>
class PowerTableW {
public:
    void init(std::uint32_t W, std::uint64_t limit, std::uint64_t guard) {
        W_ = W;
        guard_ = guard;
        limit_ = limit;
        cap_ = static_cast<std::size_t>(limit + limit / 2 + 16);
        keys_.assign(cap_ * W_, 0);
        vals_.assign(cap_, Coeff{});
        count_ = 0;
        zero_used_ = false;
        zero_val_ = Coeff{};
    }

    void add(const std::uint64_t* key, Coeff c) {
        if (all_zero(key)) {
            if (!zero_used_) {
                zero_used_ = true;
                bump();
            }
            zero_val_ += c;
            return;
        }
        std::uint64_t h = 0;
        for (std::uint32_t w = 0; w < W_; ++w) h = splitmix64(h ^ key[w]);
        std::size_t i = static_cast<std::size_t>((static_cast<unsigned __int128>(h) * cap_) >> 64);
        for (;;) {
            std::uint64_t* k = &keys_[i * W_];
            if (equal(k, key)) {
                vals_[i] += c;
                return;
            }
            if (all_zero(k)) {
                std::copy(key, key + W_, k);
                vals_[i] = c;
                bump();
                return;
            }
            if (++i == cap_) i = 0;
        }
    }

    Coeff zero_value() const { return zero_used_ ? zero_val_ : Coeff{}; }

    std::uint64_t canonical_count() const {
        std::uint64_t c = zero_used_ && zero_val_ != Coeff{} ? 1 : 0;
        for (std::size_t i = 0; i < cap_; ++i)
            if (!all_zero(&keys_[i * W_]) && vals_[i] != Coeff{}) ++c;
        return c;
    }

    // Sorted by key words, least-significant word first (any fixed order
    // works; only determinism matters).
    void compact_sorted(double prune, std::vector<std::uint64_t>& out_keys,
                        std::vector<Coeff>& out_vals) const {
        auto keep = [&](Coeff v) {
            if (v == Coeff{}) return false;
            return prune <= 0.0 || std::abs(v) > prune;
        };
        std::vector<std::size_t> idx;
        idx.reserve(static_cast<std::size_t>(count_));
        for (std::size_t i = 0; i < cap_; ++i)
            if (!all_zero(&keys_[i * W_]) && keep(vals_[i])) idx.push_back(i);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const std::uint64_t* ka = &keys_[a * W_];
            const std::uint64_t* kb = &keys_[b * W_];
            for (std::uint32_t w = 0; w < W_; ++w)
                if (ka[w] != kb[w]) return ka[w] < kb[w];
            return false;
        });
        bool zfirst = zero_used_ && keep(zero_val_);
        out_keys.assign((idx.size() + (zfirst ? 1 : 0)) * W_, 0);
        out_vals.assign(idx.size() + (zfirst ? 1 : 0), Coeff{});
        std::size_t at = 0;
        if (zfirst) out_vals[at++] = zero_val_;  // all-zero key sorts first
        for (std::size_t i : idx) {
            std::copy(&keys_[i * W_], &keys_[i * W_] + W_, &out_keys[at * W_]);
            out_vals[at++] = vals_[i];
        }
    }

private:
    bool all_zero(const std::uint64_t* k) const {
        for (std::uint32_t w = 0; w < W_; ++w)
            if (k[w]) return false;
        return true;
    }

    bool equal(const std::uint64_t* a, const std::uint64_t* b) const {
        for (std::uint32_t w = 0; w < W_; ++w)
            if (a[w] != b[w]) return false;
        return true;
    }

    void bump() {
        if (++count_ > limit_) term_guard_exceeded(guard_);
    }

    std::uint32_t W_ = 1;
    std::vector<std::uint64_t> keys_;
    std::vector<Coeff> vals_;
    std::size_t cap_ = 0;
    std::uint64_t count_ = 0;
    std::uint64_t limit_ = 0;
    std::uint64_t guard_ = 0;
    bool zero_used_ = false;
    Coeff zero_val_{};
};

// Proven upper bound on distinct supports of f^k, capped by the guard.
inline std::uint64_t power_size_limit(std::uint64_t N, int n, int d, int k,
                                      std::uint64_t prev_count, std::uint64_t guard) {
    double est = subset_parity_bound(N, k);
    est = std::min(est, ball_bound(n, static_cast<long long>(k) * d));
    est = std::min(est, static_cast<double>(prev_count) * static_cast<double>(N));
    est = std::min(est, static_cast<double>(guard) + 1.0);
    return static_cast<std::uint64_t>(est) + 1;
}

template <class Coeff>
Coeff coeff_cast(std::complex<double> c) {
    if constexpr (std::is_same_v<Coeff, double>)
        return c.real();
    else
        return c;
}

// Iterated powers f^k for k = 1..m with exact bookkeeping of every expansion;
// only E f^k (the empty-support coefficient) and the canonical term count are
// reported per power. Single-word-key specialization.
template <class Coeff>
void run_powers_1(const CubePolynomial& f, const SupportBasis& basis, int m,
                  const MomentOptions& opts, MomentsResult& R) {
    const std::uint64_t N = f.term_count();
    const int n = f.variable_count();
    const int d = f.degree();

    std::vector<std::pair<std::uint64_t, Coeff>> fterms(static_cast<std::size_t>(N));
    for (std::size_t j = 0; j < N; ++j) {
        std::uint64_t key = 0;
        basis.coords(f.terms()[j].support, &key);
        fterms[j] = {key, coeff_cast<Coeff>(f.terms()[j].coeff)};
    }
    std::sort(fterms.begin(), fterms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // k = 1: E f = alpha_0 = 0 by precondition
    R.values[0] = {};
    R.term_counts[0] = N;

    std::vector<std::pair<std::uint64_t, Coeff>> src = fterms;
    PowerTable1<Coeff> table;
    for (int k = 2; k <= m; ++k) {
        std::uint64_t limit = power_size_limit(N, n, d, k, src.size(), opts.max_terms);
        table.init(limit, opts.max_terms);
        for (const auto& [skey, sval] : src)
            for (const auto& [fkey, fval] : fterms) table.add(skey ^ fkey, sval * fval);
        R.values[static_cast<std::size_t>(k - 1)] = table.zero_value();
        std::uint64_t cnt = table.canonical_count();
        R.term_counts[static_cast<std::size_t>(k - 1)] = cnt;
        double hard = std::min(pow_saturating(static_cast<double>(N), k),
                               ball_bound(n, static_cast<long long>(k) * d));
        if (static_cast<double>(cnt) > hard)
            throw std::logic_error("power term count exceeds its combinatorial bound");
        if (k < m) {
            src = table.compact_sorted(opts.prune);
            table.release();
        }
    }
}

// General multi-word-key variant (only reachable when n > 64 and N > 64).
template <class Coeff>
void run_powers_w(const CubePolynomial& f, const SupportBasis& basis, int m,
                  const MomentOptions& opts, MomentsResult& R) {
    const std::uint64_t N = f.term_count();
    const int n = f.variable_count();
    const int d = f.degree();
    const std::uint32_t W = basis.key_words();

    std::vector<std::uint64_t> fkeys(static_cast<std::size_t>(N) * W, 0);
    std::vector<Coeff> fvals(static_cast<std::size_t>(N));
    {
        std::vector<std::size_t> order(static_cast<std::size_t>(N));
        std::vector<std::uint64_t> raw(static_cast<std::size_t>(N) * W, 0);
        for (std::size_t j = 0; j < N; ++j) {
            basis.coords(f.terms()[j].support, &raw[j * W]);
            order[j] = j;
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            for (std::uint32_t w = 0; w < W; ++w)
                if (raw[a * W + w] != raw[b * W + w]) return raw[a * W + w] < raw[b * W + w];
            return false;
        });
        for (std::size_t j = 0; j < N; ++j) {
            std::copy(&raw[order[j] * W], &raw[order[j] * W] + W, &fkeys[j * W]);
            fvals[j] = coeff_cast<Coeff>(f.terms()[order[j]].coeff);
        }
    }

    R.values[0] = {};
    R.term_counts[0] = N;

    std::vector<std::uint64_t> skeys = fkeys;
    std::vector<Coeff> svals = fvals;
    std::vector<std::uint64_t> key(W);
    PowerTableW<Coeff> table;
    for (int k = 2; k <= m; ++k) {
        std::uint64_t limit = power_size_limit(N, n, d, k, svals.size(), opts.max_terms);
        table.init(W, limit, opts.max_terms);
        for (std::size_t i = 0; i < svals.size(); ++i)
            for (std::size_t j = 0; j < fvals.size(); ++j) {
                for (std::uint32_t w = 0; w < W; ++w) key[w] = skeys[i * W + w] ^ fkeys[j * W + w];
                table.add(key.data(), svals[i] * fvals[j]);
            }
        R.values[static_cast<std::size_t>(k - 1)] = table.zero_value();
        std::uint64_t cnt = table.canonical_count();
        R.term_counts[static_cast<std::size_t>(k - 1)] = cnt;
        double hard = std::min(pow_saturating(static_cast<double>(N), k),
                               ball_bound(n, static_cast<long long>(k) * d));
        if (static_cast<double>(cnt) > hard)
            throw std::logic_error("power term count exceeds its combinatorial bound");
        if (k < m) table.compact_sorted(opts.prune, skeys, svals);
    }
}

}  // namespace detail

// E f^k for k = 1..m by iterated symbolic multiplication, keeping the full
// expansion of every power. Requires a zero constant term (strip it first);
// moments of the zero polynomial are all zero.
inline MomentsResult moments(const CubePolynomial& f, int m, const MomentOptions& opts = {}) {
    if (m < 1) throw std::invalid_argument("moment order must be at least 1");
    if (f.constant_term() != std::complex<double>{})
        throw std::invalid_argument("moments require a zero constant term; strip it first");
    MomentsResult R;
    R.prune = opts.prune;
    R.values.assign(static_cast<std::size_t>(m), {});
    R.term_counts.assign(static_cast<std::size_t>(m), 0);
    if (f.is_zero()) return R;
    if (opts.max_terms < f.term_count()) detail::term_guard_exceeded(opts.max_terms);

    detail::SupportBasis basis(f.support_width());
    for (const Term& t : f.terms()) basis.insert(t.support);

    if (basis.key_words() == 1) {
        if (f.is_real())
            detail::run_powers_1<double>(f, basis, m, opts, R);
        else
            detail::run_powers_1<std::complex<double>>(f, basis, m, opts, R);
    } else {
        if (f.is_real())
            detail::run_powers_w<double>(f, basis, m, opts, R);
        else
            detail::run_powers_w<std::complex<double>>(f, basis, m, opts, R);
    }
    return R;
}

}  // namespace cubepf
