#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <vector>

#include "cqforce/defects.hpp"
#include "cqforce/linalg/operator.hpp"
#include "cqforce/presentations.hpp"
#include "cqforce/relations.hpp"

namespace cqforce::qd {

using linalg::TruncatedOperator;
using pres::Handle;

/// (F_p, n_p, eps_p, psi_p): psi_p maps each handle to an operator on the R_n corner.
struct QDCondition {
    std::vector<Handle> F;  // sorted, contains 0
    std::size_t n = 1;
    double eps = 1.0;
    std::map<Handle, TruncatedOperator> psi;

    const TruncatedOperator& at(Handle h) const {
        const auto it = psi.find(h);
        if (it == psi.end()) throw DomainError("handle " + std::to_string(h) + " not in condition");
        return it->second;
    }
    bool has(Handle h) const { return psi.count(h) != 0; }
};

inline std::string fmt(double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

/// Well-formedness: 1 in F, psi(1) = R_n, psi(a) on the R_n corner with norm at most ||a||.
inline CheckReport qd_condition_check(const pres::HandleTable& t, const QDCondition& p) {
    CheckReport r;
    if (!std::is_sorted(p.F.begin(), p.F.end()) || std::adjacent_find(p.F.begin(), p.F.end()) != p.F.end())
        r.fail("handles", "F must be sorted without duplicates");
    if (!std::binary_search(p.F.begin(), p.F.end(), Handle{0})) r.fail("unit", "1 is not in F");
    if (!(p.eps > 0.0)) r.fail("eps", "eps must be positive");
    if (p.psi.size() != p.F.size()) r.fail("domain", "psi is not defined exactly on F");
    for (Handle h : p.F) {
        if (!p.has(h)) {
            r.fail("domain", "psi undefined on handle " + std::to_string(h));
            continue;
        }
        const auto& v = p.at(h);
        if (v.tail() != linalg::Tail::Zero || v.dim() != p.n) r.fail("corner", "psi(" + std::to_string(h) + ") is not an n x n corner");
        const double nv = linalg::operator_norm(v), na = t.algebra().norm(t[h]);
        if (nv > na) r.fail("contractive", "||psi(" + std::to_string(h) + ")|| = " + fmt(nv) + " > ||a|| = " + fmt(na));
    }
    if (p.has(0) && !identical(p.at(0), TruncatedOperator::identity(p.n, linalg::Tail::Zero)))
        r.fail("unital", "psi(1) is not the identity of the corner");
    return r;
}

/// Defects of psi_p on the window R_hi - R_lo for the given relations.
inline DefectReport qd_delta(const QDCondition& p, std::size_t lo, std::size_t hi, const rel::Relations& combos) {
    if (lo > hi || hi > p.n) throw DomainError("window outside [0, n_p]");
    auto check = [&](Handle h) {
        if (!p.has(h)) throw DomainError("handle " + std::to_string(h) + " not in F_p");
    };
    for (const auto& r : combos.linear) check(r.f), check(r.a), check(r.b);
    for (const auto& r : combos.adjoint) check(r.a), check(r.a_star);
    for (const auto& r : combos.product) check(r.a), check(r.b), check(r.ab);
    std::vector<std::size_t> coords;
    for (std::size_t i = lo; i < hi; ++i) coords.push_back(i);
    const auto window = TruncatedOperator::coordinate_projection(std::max<std::size_t>(p.n, 1), coords);
    return measure_defects(combos, [&](Handle h) -> const TruncatedOperator& { return p.at(h); }, window);
}

/// Is p below q? Window clauses are evaluated strictly with the given margin.
inline CheckReport qd_order_check(const pres::HandleTable& t, const QDCondition& p, const QDCondition& q,
                                  const Tolerances& tol = {}) {
    CheckReport r;
    if (!std::includes(p.F.begin(), p.F.end(), q.F.begin(), q.F.end())) r.fail("domain", "F_q is not contained in F_p");
    if (!(q.n < p.n)) r.fail("length", "n_q < n_p fails");
    if (!(p.eps < q.eps)) r.fail("eps", "eps_p < eps_q fails");
    if (!r.holds()) return r;

    const auto Rq = linalg::BasisProjection{q.n}.op(p.n);
    for (Handle h : q.F) {
        const auto& a = p.at(h);
        const auto left = Rq * a, right = a * Rq;
        if (!identical(right, q.at(h).resized(p.n)) || !identical(left, q.at(h).resized(p.n)))
            r.fail("block", "psi_p(" + std::to_string(h) + ") does not restrict to psi_q on the R_{n_q} corner");
    }
    std::vector<std::size_t> coords;
    for (std::size_t i = q.n; i < p.n; ++i) coords.push_back(i);
    const auto window = TruncatedOperator::coordinate_projection(p.n, coords);
    for (Handle h : q.F) {
        const double w = linalg::operator_norm(p.at(h) * window);
        const double na = t.algebra().norm(t[h]);
        if (!(w >= na - q.eps + tol.margin))
            r.fail("norm", "||psi_p(" + std::to_string(h) + ")(R_p - R_q)|| = " + fmt(w) + " not above ||a|| - eps_q = " +
                               fmt(na - q.eps));
    }
    const auto rels = rel::relations_within(t, q.F);
    const auto d = qd_delta(p, q.n, p.n, rels);
    const double bound = q.eps - p.eps;
    if (!strictly_below(d.max_additive(), bound, tol.margin))
        r.fail("additive", "additive defect " + fmt(d.max_additive()) + " not below " + fmt(bound));
    if (!strictly_below(d.max_adjoint(), bound, tol.margin))
        r.fail("adjoint", "adjoint defect " + fmt(d.max_adjoint()) + " not below " + fmt(bound));
    if (!strictly_below(d.max_product(), bound, tol.margin))
        r.fail("multiplicative", "multiplicative defect " + fmt(d.max_product()) + " not below " + fmt(bound));
    return r;
}

}  // namespace cqforce::qd
