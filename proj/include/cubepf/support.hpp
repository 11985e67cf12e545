#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cubepf {

// Set of variable indices carried by a square-free monomial. Externally the
// indices are 1-based and strictly increasing; internally the set is a bitmask
// of ceil(n/64) words (bit i-1 <=> variable i). All supports belonging to the
// same polynomial share one word count, so set operations never branch on n.
//
// The product of two square-free monomials on {-1,1}^n is again square-free
// with support equal to the symmetric difference (x_i^2 = 1), hence operator^.
class MonomialSupport {
public:
    MonomialSupport() : nwords_(1), inline_word_(0) {}

    explicit MonomialSupport(std::uint32_t nwords) : nwords_(nwords ? nwords : 1) {
        if (nwords_ == 1) {
            inline_word_ = 0;
        } else {
            heap_ = new std::uint64_t[nwords_]();
        }
    }

    MonomialSupport(const MonomialSupport& o) : nwords_(o.nwords_) {
        if (nwords_ == 1) {
            inline_word_ = o.inline_word_;
        } else {
            heap_ = new std::uint64_t[nwords_];
            std::memcpy(heap_, o.heap_, nwords_ * sizeof(std::uint64_t));
        }
    }

    MonomialSupport(MonomialSupport&& o) noexcept : nwords_(o.nwords_) {
        if (nwords_ == 1) {
            inline_word_ = o.inline_word_;
        } else {
            heap_ = o.heap_;
            o.nwords_ = 1;
            o.inline_word_ = 0;
        }
    }

    MonomialSupport& operator=(const MonomialSupport& o) {
        if (this != &o) {
            MonomialSupport tmp(o);
            swap(tmp);
        }
        return *this;
    }

    MonomialSupport& operator=(MonomialSupport&& o) noexcept {
        if (this != &o) {
            release();
            nwords_ = o.nwords_;
            if (nwords_ == 1) {
                inline_word_ = o.inline_word_;
            } else {
                heap_ = o.heap_;
                o.nwords_ = 1;
                o.inline_word_ = 0;
            }
        }
        return *this;
    }

    ~MonomialSupport() { release(); }

    void swap(MonomialSupport& o) noexcept {
        std::swap(nwords_, o.nwords_);
        std::swap(inline_word_, o.inline_word_);  // unions share storage
    }

    // Words needed for an n-variable polynomial (at least one).
    static std::uint32_t words_for(int n) {
        return n <= 64 ? 1u : static_cast<std::uint32_t>((n + 63) / 64);
    }

    // Build from 1-based indices; rejects out-of-range and duplicate entries.
    static MonomialSupport from_indices(std::span<const int> indices, int n) {
        MonomialSupport s(words_for(n));
        for (int i : indices) {
            if (i < 1 || i > n)
                throw std::invalid_argument("variable index " + std::to_string(i) +
                                            " out of range [1," + std::to_string(n) + "]");
            if (s.contains(i))
                throw std::invalid_argument("duplicate variable index " + std::to_string(i) +
                                            " in monomial support");
            s.set(i);
        }
        return s;
    }

    static MonomialSupport from_indices(std::initializer_list<int> indices, int n) {
        return from_indices(std::span<const int>(indices.begin(), indices.size()), n);
    }

    std::uint32_t word_count() const { return nwords_; }
    const std::uint64_t* words() const { return nwords_ == 1 ? &inline_word_ : heap_; }
    std::uint64_t* words() { return nwords_ == 1 ? &inline_word_ : heap_; }

    bool contains(int i) const {
        std::uint32_t w = static_cast<std::uint32_t>(i - 1) >> 6;
        return (words()[w] >> ((i - 1) & 63)) & 1u;
    }

    void set(int i) { words()[static_cast<std::uint32_t>(i - 1) >> 6] |= std::uint64_t{1} << ((i - 1) & 63); }
    void reset(int i) { words()[static_cast<std::uint32_t>(i - 1) >> 6] &= ~(std::uint64_t{1} << ((i - 1) & 63)); }

    bool empty() const {
        const std::uint64_t* w = words();
        for (std::uint32_t k = 0; k < nwords_; ++k)
            if (w[k]) return false;
        return true;
    }

    // |I|: the degree of the monomial.
    int cardinality() const {
        const std::uint64_t* w = words();
        int c = 0;
        for (std::uint32_t k = 0; k < nwords_; ++k) c += std::popcount(w[k]);
        return c;
    }

    // Ascending 1-based indices.
    std::vector<int> indices() const {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(cardinality()));
        for_each_index([&](int i) { out.push_back(i); });
        return out;
    }

    template <class F>
    void for_each_index(F&& f) const {
        const std::uint64_t* w = words();
        for (std::uint32_t k = 0; k < nwords_; ++k) {
            std::uint64_t m = w[k];
            while (m) {
                f(static_cast<int>(k * 64 + static_cast<std::uint32_t>(std::countr_zero(m))) + 1);
                m &= m - 1;
            }
        }
    }

    MonomialSupport& operator^=(const MonomialSupport& o) {
        check_width(o);
        std::uint64_t* a = words();
        const std::uint64_t* b = o.words();
        for (std::uint32_t k = 0; k < nwords_; ++k) a[k] ^= b[k];
        return *this;
    }

    friend MonomialSupport operator^(MonomialSupport a, const MonomialSupport& b) {
        a ^= b;
        return a;
    }

    bool operator==(const MonomialSupport& o) const {
        check_width(o);
        return std::memcmp(words(), o.words(), nwords_ * sizeof(std::uint64_t)) == 0;
    }

    // Total order treating the mask as one big unsigned integer (high word
    // first); used to keep polynomial term lists canonically sorted.
    std::strong_ordering operator<=>(const MonomialSupport& o) const {
        check_width(o);
        const std::uint64_t* a = words();
        const std::uint64_t* b = o.words();
        for (std::uint32_t k = nwords_; k-- > 0;) {
            if (a[k] != b[k]) return a[k] < b[k] ? std::strong_ordering::less : std::strong_ordering::greater;
        }
        return std::strong_ordering::equal;
    }

    // Parity of |I ∩ M| where M is a packed sign mask of the same width;
    // true means the monomial evaluates to -1 at the point encoded by M.
    bool parity_with(const std::uint64_t* mask) const {
        const std::uint64_t* w = words();
        int p = 0;
        for (std::uint32_t k = 0; k < nwords_; ++k) p ^= std::popcount(w[k] & mask[k]) & 1;
        return p != 0;
    }

    std::uint64_t hash64() const {
        // splitmix64-style word mixer
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        const std::uint64_t* w = words();
        for (std::uint32_t k = 0; k < nwords_; ++k) {
            std::uint64_t z = w[k] + 0xbf58476d1ce4e5b9ull + h;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            h = z ^ (z >> 31);
        }
        return h;
    }

private:
    void release() {
        if (nwords_ > 1) delete[] heap_;
        nwords_ = 1;
        inline_word_ = 0;
    }

    void check_width(const MonomialSupport& o) const {
        if (nwords_ != o.nwords_)
            throw std::invalid_argument("monomial supports have different widths");
    }

    std::uint32_t nwords_;
    union {
        std::uint64_t inline_word_;  // nwords_ == 1
        std::uint64_t* heap_;        // nwords_ > 1, owned
    };
};

}  // namespace cubepf
