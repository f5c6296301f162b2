#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "cqforce/errors.hpp"

namespace cqforce::boolean {

/// Subset of the ambient atom set {0, ..., m-1}, m <= 64.
using Mask = std::uint64_t;

inline Mask full_mask(std::size_t m) { return m >= 64 ? ~Mask{0} : ((Mask{1} << m) - 1); }

/// Finite subalgebra of the powerset of m ambient atoms, stored as the partition
/// of the ambient set into its atoms (blocks), ordered by lowest member.
class FiniteBooleanAlgebra {
public:
    FiniteBooleanAlgebra() = default;

    FiniteBooleanAlgebra(std::size_t ambient, std::vector<Mask> blocks) : ambient_(ambient), blocks_(std::move(blocks)) {
        if (ambient_ < 1 || ambient_ > 64) throw ValidationError("ambient atom count must be in 1..64");
        std::sort(blocks_.begin(), blocks_.end(), [](Mask a, Mask b) { return (a & -a) < (b & -b); });
        Mask seen = 0;
        for (Mask b : blocks_) {
            if (b == 0) throw ValidationError("empty block");
            if (b & seen) throw ValidationError("blocks overlap");
            seen |= b;
        }
        if (seen != full_mask(ambient_)) throw ValidationError("blocks do not cover the ambient set");
    }

    std::size_t ambient() const noexcept { return ambient_; }
    const std::vector<Mask>& atoms() const noexcept { return blocks_; }
    std::size_t atom_count() const noexcept { return blocks_.size(); }
    Mask top() const noexcept { return full_mask(ambient_); }
    Mask complement(Mask x) const noexcept { return top() & ~x; }

    bool contains(Mask x) const noexcept {
        if (x & ~top()) return false;
        for (Mask b : blocks_)
            if ((x & b) != 0 && (x & b) != b) return false;
        return true;
    }

    /// Every element, in order of the atom-incidence code (bit i = atom i).
    std::vector<Mask> elements() const {
        if (blocks_.size() > 20) throw SizeError("algebra too large to enumerate");
        std::vector<Mask> out;
        out.reserve(std::size_t{1} << blocks_.size());
        for (std::size_t code = 0; code < (std::size_t{1} << blocks_.size()); ++code) out.push_back(decode(code));
        return out;
    }

    Mask decode(std::uint64_t code) const noexcept {
        Mask x = 0;
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if (code & (std::uint64_t{1} << i)) x |= blocks_[i];
        return x;
    }
    /// Atom-incidence code of an element.
    std::uint64_t encode(Mask x) const {
        if (!contains(x)) throw DomainError("element not in algebra");
        std::uint64_t code = 0;
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if ((x & blocks_[i]) != 0) code |= std::uint64_t{1} << i;
        return code;
    }

    /// Every element of other is an element of this algebra.
    bool includes(const FiniteBooleanAlgebra& other) const {
        if (other.ambient_ != ambient_) return false;
        for (Mask b : other.blocks_)
            if (!contains(b)) return false;
        return true;
    }

    friend bool operator==(const FiniteBooleanAlgebra& a, const FiniteBooleanAlgebra& b) {
        return a.ambient_ == b.ambient_ && a.blocks_ == b.blocks_;
    }

private:
    std::size_t ambient_ = 1;
    std::vector<Mask> blocks_{1};
};

/// Smallest subalgebra containing the generators, by partition refinement.
inline FiniteBooleanAlgebra generate_subalgebra(std::size_t ambient, const std::vector<Mask>& generators) {
    if (ambient < 1 || ambient > 64) throw ValidationError("ambient atom count must be in 1..64");
    std::vector<Mask> blocks{full_mask(ambient)};
    for (Mask g : generators) {
        if (g & ~full_mask(ambient)) throw ValidationError("generator outside ambient set");
        std::vector<Mask> next;
        for (Mask b : blocks) {
            if (b & g) next.push_back(b & g);
            if (b & ~g) next.push_back(b & ~g);
        }
        blocks = std::move(next);
    }
    return FiniteBooleanAlgebra(ambient, std::move(blocks));
}

/// Isomorphism of a finite algebra onto the powerset of its k atoms.
struct PowersetEmbedding {
    FiniteBooleanAlgebra source;

    std::size_t k() const noexcept { return source.atom_count(); }
    std::uint64_t operator()(Mask x) const { return source.encode(x); }
    Mask inverse(std::uint64_t code) const { return source.decode(code); }
};

inline PowersetEmbedding embed_into_powerset(const FiniteBooleanAlgebra& b) { return PowersetEmbedding{b}; }

struct FreeAlgebra {
    FiniteBooleanAlgebra algebra;
    std::vector<Mask> generators;
};

/// Free Boolean algebra on g generators, realised on 2^g singleton atoms:
/// generator i is the set of atoms whose index has bit i set.
inline FreeAlgebra free_boolean_algebra(std::size_t g) {
    if (g > 5) throw SizeError("free algebra limited to 5 generators");
    const std::size_t m = std::size_t{1} << g;
    std::vector<Mask> gens(g, 0);
    for (std::size_t atom = 0; atom < m; ++atom)
        for (std::size_t i = 0; i < g; ++i)
            if (atom & (std::size_t{1} << i)) gens[i] |= Mask{1} << atom;
    return {generate_subalgebra(m, gens), gens};
}

}  // namespace cqforce::boolean
