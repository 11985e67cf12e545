#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "support.hpp"

namespace cubepf {

// A point of {-1,1}^n.
class CubePoint {
public:
    CubePoint() = default;

    explicit CubePoint(int n, int fill = +1) : signs_(check_n(n), check_sign(fill)) {}

    static CubePoint from_signs(std::span<const int> signs) {
        CubePoint p(static_cast<int>(signs.size()));
        for (std::size_t i = 0; i < signs.size(); ++i) p.signs_[i] = check_sign(signs[i]);
        return p;
    }

    int dimension() const { return static_cast<int>(signs_.size()); }

    int sign(int i) const {
        check_index(i);
        return signs_[static_cast<std::size_t>(i - 1)];
    }

    void set_sign(int i, int s) {
        check_index(i);
        signs_[static_cast<std::size_t>(i - 1)] = check_sign(s);
    }

    void flip(int i) {
        check_index(i);
        auto& s = signs_[static_cast<std::size_t>(i - 1)];
        s = static_cast<std::int8_t>(-s);
    }

    // Packed mask with bit i-1 set iff x_i = -1, matching MonomialSupport
    // word layout; a monomial's sign at this point is the parity of the
    // AND with its support.
    std::vector<std::uint64_t> negative_mask() const {
        std::vector<std::uint64_t> m(MonomialSupport::words_for(dimension()), 0);
        for (std::size_t i = 0; i < signs_.size(); ++i)
            if (signs_[i] < 0) m[i >> 6] |= std::uint64_t{1} << (i & 63);
        return m;
    }

    bool operator==(const CubePoint& o) const = default;

private:
    static int check_n(int n) {
        if (n < 0) throw std::invalid_argument("cube dimension must be nonnegative");
        return n;
    }

    static std::int8_t check_sign(int s) {
        if (s != 1 && s != -1) throw std::invalid_argument("cube coordinate must be +1 or -1");
        return static_cast<std::int8_t>(s);
    }

    void check_index(int i) const {
        if (i < 1 || i > dimension())
            throw std::invalid_argument("coordinate index " + std::to_string(i) + " out of range");
    }

    std::vector<std::int8_t> signs_;
};

struct Term {
    MonomialSupport support;
    std::complex<double> coeff;
};

// Multilinear polynomial on {-1,1}^n in the square-free monomial basis,
//     f(x) = sum_I alpha_I prod_{i in I} x_i.
// Canonical form: terms sorted by support, no two terms share a support, no
// term has an exactly-zero coefficient. Values are immutable once built, so
// const polynomials are safe to share across threads.
class CubePolynomial {
public:
    explicit CubePolynomial(int n) : n_(check_n(n)) {}

    // Merges duplicate supports additively, drops exact zeros, sorts.
    static CubePolynomial from_terms(int n, std::vector<Term> terms) {
        CubePolynomial f(n);
        const std::uint32_t w = MonomialSupport::words_for(n);
        for (const Term& t : terms) {
            if (t.support.word_count() != w)
                throw std::invalid_argument("term support width does not match variable count");
            check_support_range(t.support, n);
        }
        std::sort(terms.begin(), terms.end(),
                  [](const Term& a, const Term& b) { return a.support < b.support; });
        for (Term& t : terms) {
            if (!f.terms_.empty() && f.terms_.back().support == t.support)
                f.terms_.back().coeff += t.coeff;
            else
                f.terms_.push_back(std::move(t));
        }
        std::erase_if(f.terms_, [](const Term& t) { return t.coeff == std::complex<double>{}; });
        return f;
    }

    static CubePolynomial constant(int n, std::complex<double> c) {
        CubePolynomial f(n);
        if (c != std::complex<double>{})
            f.terms_.push_back({MonomialSupport(MonomialSupport::words_for(n)), c});
        return f;
    }

    static CubePolynomial monomial(int n, std::span<const int> indices, std::complex<double> c) {
        std::vector<Term> t;
        t.push_back({MonomialSupport::from_indices(indices, n), c});
        return from_terms(n, std::move(t));
    }

    // x_1 + ... + x_n
    static CubePolynomial sum_of_variables(int n) {
        std::vector<Term> t;
        t.reserve(static_cast<std::size_t>(n));
        for (int i = 1; i <= n; ++i) {
            int idx[1] = {i};
            t.push_back({MonomialSupport::from_indices(idx, n), 1.0});
        }
        return from_terms(n, std::move(t));
    }

    int variable_count() const { return n_; }
    std::size_t term_count() const { return terms_.size(); }
    const std::vector<Term>& terms() const { return terms_; }
    std::uint32_t support_width() const { return MonomialSupport::words_for(n_); }

    bool is_zero() const { return terms_.empty(); }

    bool is_real() const {
        return std::all_of(terms_.begin(), terms_.end(),
                           [](const Term& t) { return t.coeff.imag() == 0.0; });
    }

    // alpha_I, zero when the support is absent.
    std::complex<double> coefficient(const MonomialSupport& s) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), s,
                                   [](const Term& t, const MonomialSupport& key) { return t.support < key; });
        if (it != terms_.end() && it->support == s) return it->coeff;
        return {};
    }

    std::complex<double> constant_term() const {
        if (!terms_.empty() && terms_.front().support.empty()) return terms_.front().coeff;
        return {};
    }

    // deg f: largest |I| over stored terms; 0 for constants and the zero
    // polynomial.
    int degree() const {
        int d = 0;
        for (const Term& t : terms_) d = std::max(d, t.support.cardinality());
        return d;
    }

    // L(f) = max_i sum_{I containing i} |alpha_I|, an upper bound on the
    // flip increment |f(x) - f(x^i)| / 2; 0 for constants.
    double lipschitz() const {
        std::vector<double> load(static_cast<std::size_t>(n_), 0.0);
        for (const Term& t : terms_) {
            double a = std::abs(t.coeff);
            t.support.for_each_index([&](int i) { load[static_cast<std::size_t>(i - 1)] += a; });
        }
        double best = 0.0;
        for (double v : load) best = std::max(best, v);
        return best;
    }

    std::complex<double> evaluate(const CubePoint& x) const {
        if (x.dimension() != n_)
            throw std::invalid_argument("point dimension does not match polynomial");
        std::vector<std::uint64_t> neg = x.negative_mask();
        std::complex<double> acc = 0.0;
        for (const Term& t : terms_)
            acc += t.support.parity_with(neg.data()) ? -t.coeff : t.coeff;
        return acc;
    }

    CubePolynomial operator+(const CubePolynomial& o) const {
        check_same_n(o);
        std::vector<Term> t;
        t.reserve(terms_.size() + o.terms_.size());
        t.insert(t.end(), terms_.begin(), terms_.end());
        t.insert(t.end(), o.terms_.begin(), o.terms_.end());
        return from_terms(n_, std::move(t));
    }

    CubePolynomial operator-(const CubePolynomial& o) const { return *this + (-1.0) * o; }

    // Product in the cube algebra: supports combine by symmetric difference.
    // Products are emitted in sorted-operand order and merged canonically, so
    // the result is bit-for-bit reproducible.
    CubePolynomial operator*(const CubePolynomial& o) const {
        check_same_n(o);
        std::vector<Term> prod;
        prod.reserve(terms_.size() * o.terms_.size());
        for (const Term& a : terms_)
            for (const Term& b : o.terms_)
                prod.push_back({a.support ^ b.support, a.coeff * b.coeff});
        return from_terms(n_, std::move(prod));
    }

    friend CubePolynomial operator*(std::complex<double> c, const CubePolynomial& f) {
        CubePolynomial g(f.n_);
        if (c == std::complex<double>{}) return g;
        g.terms_ = f.terms_;
        for (Term& t : g.terms_) t.coeff *= c;
        return g;
    }

    // Substitute x_i = s; the variable count is intentionally unchanged so a
    // conditioning cascade keeps one index space throughout.
    CubePolynomial restrict_variable(int i, int s) const {
        check_var(i);
        if (s != 1 && s != -1) throw std::invalid_argument("restriction value must be +1 or -1");
        std::vector<Term> t;
        t.reserve(terms_.size());
        for (const Term& term : terms_) {
            Term u = term;
            if (u.support.contains(i)) {
                u.support.reset(i);
                if (s < 0) u.coeff = -u.coeff;
            }
            t.push_back(std::move(u));
        }
        return from_terms(n_, std::move(t));
    }

    // Substitute x_i = -x_i (negates every coefficient whose support holds i).
    CubePolynomial flip_variable(int i) const {
        check_var(i);
        CubePolynomial g(n_);
        g.terms_ = terms_;
        for (Term& t : g.terms_)
            if (t.support.contains(i)) t.coeff = -t.coeff;
        return g;
    }

    // Splits off alpha_0: returns (f - alpha_0, alpha_0).
    std::pair<CubePolynomial, std::complex<double>> strip_constant() const {
        CubePolynomial g(n_);
        std::complex<double> c = constant_term();
        g.terms_.assign(terms_.begin() + (c != std::complex<double>{} ? 1 : 0), terms_.end());
        return {std::move(g), c};
    }

    // Order- and representation-sensitive digest used to pair a rounding
    // trace with the polynomial it was produced from.
    std::uint64_t fingerprint() const {
        std::uint64_t h = 0x61c8864680b583ebull * static_cast<std::uint64_t>(n_ + 1);
        auto mix = [&h](std::uint64_t v) {
            h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        };
        for (const Term& t : terms_) {
            mix(t.support.hash64());
            std::uint64_t re, im;
            double dr = t.coeff.real(), di = t.coeff.imag();
            std::memcpy(&re, &dr, 8);
            std::memcpy(&im, &di, 8);
            mix(re);
            mix(im);
        }
        return h;
    }

    bool operator==(const CubePolynomial& o) const {
        if (n_ != o.n_ || terms_.size() != o.terms_.size()) return false;
        for (std::size_t k = 0; k < terms_.size(); ++k)
            if (!(terms_[k].support == o.terms_[k].support) || terms_[k].coeff != o.terms_[k].coeff)
                return false;
        return true;
    }

private:
    static int check_n(int n) {
        if (n < 0) throw std::invalid_argument("variable count must be nonnegative");
        return n;
    }

    static void check_support_range(const MonomialSupport& s, int n) {
        // Bits above n would denote phantom variables.
        const std::uint64_t* w = s.words();
        for (std::uint32_t k = 0; k < s.word_count(); ++k) {
            std::uint64_t m = w[k];
            while (m) {
                int bit = static_cast<int>(k) * 64 + std::countr_zero(m);
                if (bit >= n)
                    throw std::invalid_argument("support index " + std::to_string(bit + 1) +
                                                " exceeds variable count " + std::to_string(n));
                m &= m - 1;
            }
        }
    }

    void check_same_n(const CubePolynomial& o) const {
        if (n_ != o.n_)
            throw std::invalid_argument("polynomials have different variable counts");
    }

    void check_var(int i) const {
        if (i < 1 || i > n_)
            throw std::invalid_argument("variable index " + std::to_string(i) + " out of range [1," +
                                        std::to_string(n_) + "]");
    }

    int n_;
    std::vector<Term> terms_;
};

}  // namespace cubepf
