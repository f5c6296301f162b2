#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "cqforce/errors.hpp"

namespace cqforce::pb {

/// Fixed-length bit vector packed into 64-bit words; unused high bits stay zero.
class Bits {
public:
    Bits() = default;
    explicit Bits(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

    std::size_t size() const noexcept { return size_; }
    bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
    void set(std::size_t i, bool v = true) {
        const std::uint64_t bit = std::uint64_t{1} << (i % 64);
        if (v)
            words_[i / 64] |= bit;
        else
            words_[i / 64] &= ~bit;
    }
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    /// Copy of bits [lo, hi).
    Bits slice(std::size_t lo, std::size_t hi) const {
        Bits out(hi - lo);
        for (std::size_t i = lo; i < hi; ++i)
            if (get(i)) out.set(i - lo);
        return out;
    }
    /// Copy extended with zeros (or truncated) to length n.
    Bits resized(std::size_t n) const {
        Bits out(n);
        const std::size_t w = std::min(out.words_.size(), words_.size());
        for (std::size_t i = 0; i < w; ++i) out.words_[i] = words_[i];
        out.trim();
        return out;
    }
    /// Concatenation.
    Bits append(const Bits& tail) const {
        Bits out = resized(size_ + tail.size_);
        for (std::size_t i = 0; i < tail.size_; ++i)
            if (tail.get(i)) out.set(size_ + i);
        return out;
    }

    friend Bits operator&(const Bits& a, const Bits& b) { return a.zip(b, [](auto x, auto y) { return x & y; }); }
    friend Bits operator|(const Bits& a, const Bits& b) { return a.zip(b, [](auto x, auto y) { return x | y; }); }
    friend Bits operator^(const Bits& a, const Bits& b) { return a.zip(b, [](auto x, auto y) { return x ^ y; }); }
    Bits operator~() const {
        Bits out = *this;
        for (auto& w : out.words_) w = ~w;
        out.trim();
        return out;
    }
    friend bool operator==(const Bits& a, const Bits& b) = default;

    std::size_t popcount() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    /// Set bits within [lo, hi).
    std::size_t popcount_range(std::size_t lo, std::size_t hi) const {
        std::size_t c = 0;
        for (std::size_t w = lo / 64; w < words_.size() && w * 64 < hi; ++w) {
            std::uint64_t word = words_[w];
            const std::size_t base = w * 64;
            if (lo > base) word &= ~std::uint64_t{0} << (lo - base);
            if (hi < base + 64) word &= (std::uint64_t{1} << (hi - base)) - 1;
            c += static_cast<std::size_t>(std::popcount(word));
        }
        return c;
    }
    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }
    /// One past the highest set bit, or 0.
    std::size_t last_set_end() const {
        for (std::size_t i = words_.size(); i-- > 0;)
            if (words_[i]) return i * 64 + 64 - static_cast<std::size_t>(std::countl_zero(words_[i]));
        return 0;
    }

    /// Hex encoding, least significant nibble first.
    std::string to_hex() const {
        static const char* digits = "0123456789abcdef";
        std::string s((size_ + 3) / 4, '0');
        for (std::size_t k = 0; k < s.size(); ++k) {
            unsigned v = 0;
            for (unsigned b = 0; b < 4; ++b)
                if (4 * k + b < size_ && get(4 * k + b)) v |= 1u << b;
            s[k] = digits[v];
        }
        return s;
    }
    static Bits from_hex(const std::string& s, std::size_t n) {
        if (s.size() != (n + 3) / 4) throw ValidationError("bit string length mismatch");
        Bits out(n);
        for (std::size_t k = 0; k < s.size(); ++k) {
            const char c = s[k];
            unsigned v;
            if (c >= '0' && c <= '9')
                v = static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f')
                v = static_cast<unsigned>(c - 'a' + 10);
            else
                throw ValidationError("invalid hex digit in bit string");
            for (unsigned b = 0; b < 4; ++b)
                if (v & (1u << b)) {
                    if (4 * k + b >= n) throw ValidationError("bit string has bits past its length");
                    out.set(4 * k + b);
                }
        }
        return out;
    }

private:
    template <class Op>
    Bits zip(const Bits& b, Op op) const {
        if (size_ != b.size_) throw ValidationError("bit vectors of different length");
        Bits out(size_);
        for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = op(words_[i], b.words_[i]);
        return out;
    }
    void trim() {
        if (size_ % 64 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace cqforce::pb
