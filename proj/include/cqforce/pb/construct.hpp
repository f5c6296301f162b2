#pragma once

#include <vector>

#include "cqforce/pb/condition.hpp"

namespace cqforce::pb {

namespace detail {

/// Atom-incidence segment of length len for element e of b: position j is set
/// iff atom (j mod k) lies below e. Repetition keeps it an injective homomorphism.
inline Bits incidence_segment(const FiniteBooleanAlgebra& b, Mask e, std::size_t len) {
    const auto& atoms = b.atoms();
    Bits out(len);
    for (std::size_t j = 0; j < len; ++j)
        if ((atoms[j % atoms.size()] & e) != 0) out.set(j);
    return out;
}

}  // namespace detail

/// Extension into the dense set of conditions containing new_elements and of
/// length at least n_min.
inline PBCondition pb_extend(const PBCondition& q, const std::vector<Mask>& new_elements, std::size_t n_min) {
    std::vector<Mask> gens = q.algebra.atoms();
    gens.insert(gens.end(), new_elements.begin(), new_elements.end());
    PBCondition p;
    p.algebra = boolean::generate_subalgebra(q.algebra.ambient(), gens);
    const std::size_t k = p.algebra.atom_count();
    p.n = std::max({n_min, q.n + 1, q.n + k});
    for (Mask e : p.algebra.elements()) {
        const auto it = q.psi.find(e);
        const Bits prefix = it != q.psi.end() ? it->second : Bits(q.n);
        p.psi.emplace(e, prefix.append(detail::incidence_segment(p.algebra, e, p.n - q.n)));
    }
    return p;
}

/// Common extension of two conditions of equal length agreeing on shared elements.
inline PBCondition pb_amalgamate(const PBCondition& p, const PBCondition& q) {
    if (p.algebra.ambient() != q.algebra.ambient())
        throw IncompatiblePresentation("ambient", "conditions over different ambient sets");
    if (p.n != q.n) throw IncompatiblePresentation("length", "n_p != n_q");
    for (const auto& [e, v] : p.psi) {
        const auto it = q.psi.find(e);
        if (it != q.psi.end() && it->second != v)
            throw IncompatiblePresentation("agreement", "psi_p and psi_q differ on element " + std::to_string(e));
    }
    std::vector<Mask> gens = p.algebra.atoms();
    gens.insert(gens.end(), q.algebra.atoms().begin(), q.algebra.atoms().end());
    PBCondition s;
    s.algebra = boolean::generate_subalgebra(p.algebra.ambient(), gens);
    const std::size_t k = s.algebra.atom_count();
    s.n = p.n + k;
    for (Mask e : s.algebra.elements()) {
        Bits prefix(p.n);
        if (auto it = p.psi.find(e); it != p.psi.end())
            prefix = it->second;
        else if (auto jt = q.psi.find(e); jt != q.psi.end())
            prefix = jt->second;
        s.psi.emplace(e, prefix.append(detail::incidence_segment(s.algebra, e, k)));
    }
    return s;
}

}  // namespace cqforce::pb
