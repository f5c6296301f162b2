#pragma once

#include <map>
#include <string>

#include "cqforce/boolean.hpp"
#include "cqforce/pb/bits.hpp"

namespace cqforce::pb {

using boolean::FiniteBooleanAlgebra;
using boolean::Mask;

/// (B_p, n_p, psi_p): a finite subalgebra, a length, and an arbitrary map into 2^n.
struct PBCondition {
    FiniteBooleanAlgebra algebra;
    std::size_t n = 0;
    std::map<Mask, Bits> psi;

    void validate() const {
        const auto elems = algebra.elements();
        if (psi.size() != elems.size()) throw ValidationError("psi is not total on the algebra");
        for (Mask e : elems) {
            const auto it = psi.find(e);
            if (it == psi.end()) throw ValidationError("psi is not total on the algebra");
            if (it->second.size() != n) throw ValidationError("psi value has wrong length");
        }
    }
    const Bits& at(Mask e) const {
        const auto it = psi.find(e);
        if (it == psi.end()) throw DomainError("element not in condition");
        return it->second;
    }
};

/// The root ({0,1}, 1, {0 -> 0, 1 -> 1}).
inline PBCondition pb_root(std::size_t ambient) {
    PBCondition p;
    p.algebra = boolean::generate_subalgebra(ambient, {});
    p.n = 1;
    Bits one(1);
    one.set(0);
    p.psi[0] = Bits(1);
    p.psi[p.algebra.top()] = one;
    return p;
}

/// Is p below q (p extends q)?
inline CheckReport pb_order_check(const PBCondition& p, const PBCondition& q) {
    if (p.algebra.ambient() != q.algebra.ambient()) throw ValidationError("conditions over different ambient sets");
    p.validate();
    q.validate();
    CheckReport r;
    if (!p.algebra.includes(q.algebra)) r.fail("algebra", "B_q is not contained in B_p");
    if (!(q.n < p.n)) {
        r.fail("length", "n_q < n_p fails (" + std::to_string(q.n) + " vs " + std::to_string(p.n) + ")");
        return r;
    }
    if (!r.holds()) return r;

    const auto elems = q.algebra.elements();
    std::map<Mask, Bits> seg;
    for (Mask e : elems) {
        const Bits& full = p.at(e);
        if (full.resized(q.n) != q.at(e)) r.fail("extension", "psi_p does not extend psi_q on element " + std::to_string(e));
        seg.emplace(e, full.slice(q.n, p.n));
    }
    const std::size_t len = p.n - q.n;
    const Mask top = q.algebra.top();
    if (seg.at(0).any()) r.fail("zero", "segment map sends 0 to a nonzero vector");
    if (seg.at(top) != ~Bits(len)) r.fail("unit", "segment map does not send 1 to the full vector");
    for (Mask a : elems) {
        if (seg.at(q.algebra.complement(a)) != ~seg.at(a)) {
            r.fail("complement", "segment map does not preserve complement of " + std::to_string(a));
            break;
        }
    }
    bool meets = true, joins = true, injective = true;
    for (std::size_t i = 0; i < elems.size() && (meets || joins || injective); ++i) {
        for (std::size_t j = i + 1; j < elems.size(); ++j) {
            const Mask a = elems[i], b = elems[j];
            const Bits& sa = seg.at(a);
            const Bits& sb = seg.at(b);
            if (meets && seg.at(a & b) != (sa & sb)) {
                meets = false;
                r.fail("meet", "segment map does not preserve meet of " + std::to_string(a) + ", " + std::to_string(b));
            }
            if (joins && seg.at(a | b) != (sa | sb)) {
                joins = false;
                r.fail("join", "segment map does not preserve join of " + std::to_string(a) + ", " + std::to_string(b));
            }
            if (injective && sa == sb) {
                injective = false;
                r.fail("injectivity", "segment map identifies " + std::to_string(a) + " and " + std::to_string(b));
            }
        }
    }
    return r;
}

}  // namespace cqforce::pb
