#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "cqforce/defects.hpp"
#include "cqforce/ea/representation.hpp"
#include "cqforce/linalg/spectral.hpp"
#include "cqforce/relations.hpp"

namespace cqforce::ea {

using linalg::BasisProjection;
using linalg::SpectralContraction;
using pres::Handle;

/// (k_p, Phi_p). k is stored as an element of C; the promise uses its 1-eigenspace.
struct Promise {
    SpectralContraction k;
    LazyRepresentation phi;

    TruncatedOperator k_projection() const { return linalg::one_eigenspace_projection(k); }
};

/// (F_p, eps_p, h_p, R_p, psi_p) with its attached promise.
struct EACondition {
    std::vector<Handle> F;  // sorted, contains 0, closed under adjoints
    double eps = 1.0;
    SpectralContraction h;
    BasisProjection R;
    std::map<Handle, TruncatedOperator> psi;
    std::optional<Promise> promise;

    const TruncatedOperator& at(Handle a) const {
        const auto it = psi.find(a);
        if (it == psi.end()) throw DomainError("handle " + std::to_string(a) + " not in condition");
        return it->second;
    }
    bool has(Handle a) const { return psi.count(a) != 0; }

    /// Dimension covering h, R and every psi value.
    std::size_t dim() const {
        std::size_t n = std::max(h.dim(), R.n);
        for (const auto& [a, v] : psi) n = std::max(n, v.dim());
        if (promise) n = std::max(n, promise->k.dim());
        return std::max<std::size_t>(n, 1);
    }
};

namespace detail {

inline std::string fmt(double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

/// One past the last nonzero row or column.
inline std::size_t support_end(const Matrix& m) {
    std::size_t end = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != linalg::Scalar(0.0, 0.0)) end = std::max<std::size_t>(end, static_cast<std::size_t>(std::max(i, j)) + 1);
    return end;
}

inline Matrix identity(std::size_t n) {
    return Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

}  // namespace detail

/// Projection onto span(h+[H] + R[H]) in dimension n.
inline TruncatedOperator corner_projection(const SpectralContraction& h, const BasisProjection& R, std::size_t n) {
    const Matrix hp = linalg::range_projection(h).padded(n);
    if (h.coordinate_form()) {
        Matrix s = hp;
        for (std::size_t i = 0; i < R.n; ++i) s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
        return TruncatedOperator(std::move(s));
    }
    Matrix cols(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(2 * n));
    cols.leftCols(static_cast<Eigen::Index>(n)) = hp;
    cols.rightCols(static_cast<Eigen::Index>(n)) = R.op(n).entries();
    return linalg::projection_from_basis(linalg::orthonormal_span(cols), n);
}

struct ConstantBundle {
    double L = 0.0;     // L(F)
    double J = 0.0;     // J(F)
    double M_p = 0.0;
    double M_pF = 0.0;  // M(p, F)
    double N = 0.0;     // N(p, Phi)
    double D = 0.0;     // D(p, Phi)
};

/// Constants attached to p, a finite set F and a promise.
inline ConstantBundle ea_constants(const pres::HandleTable& t, const EACondition& p, const std::vector<Handle>& F,
                                   const Promise& promise) {
    const auto& A = t.algebra();
    ConstantBundle c;
    c.L = rel::linear_constant(rel::relations_within(t, F));
    for (Handle a : F) c.J = std::max(c.J, A.norm(t[a]));
    const double Lp = rel::linear_constant(rel::relations_within(t, p.F));
    c.M_p = Lp;
    for (Handle a : p.F) c.M_p = std::max({c.M_p, 3.0 * A.norm(t[a]), 3.0 * linalg::operator_norm(p.at(a))});
    c.M_pF = 3.0 * std::max({3.0 * c.M_p + 1.0, c.L, 2.0 * c.J + 1.0});

    const std::size_t n = promise.phi.closure(p.dim());
    const Matrix hplus = linalg::range_projection(p.h).padded(n);
    const Matrix k = promise.k_projection().padded(n);
    const Matrix id = detail::identity(n);
    c.D = std::numeric_limits<double>::infinity();
    for (Handle a : p.F) {
        const Matrix psi = p.at(a).padded(n);
        const Matrix phi = promise.phi.matrix(t[a], n);
        c.N = std::max(c.N, linalg::spectral_norm(linalg::multiply(psi - phi, hplus - k)));
        // Phi(a)(1 - R_n) is an orthogonal summand of norm ||a||.
        const double na = A.norm(t[a]);
        const double total = std::max(linalg::spectral_norm(psi + linalg::multiply(phi, id - hplus)), na);
        c.D = std::min(c.D, 1.5 * na - total);
    }
    return c;
}

/// Well-formedness of the condition itself.
inline CheckReport ea_condition_check(const pres::HandleTable& t, const EACondition& p) {
    CheckReport r;
    if (!std::is_sorted(p.F.begin(), p.F.end()) || std::adjacent_find(p.F.begin(), p.F.end()) != p.F.end())
        r.fail("handles", "F must be sorted without duplicates");
    if (!std::binary_search(p.F.begin(), p.F.end(), Handle{0})) r.fail("unit", "1 is not in F");
    for (Handle a : p.F)
        if (!std::binary_search(p.F.begin(), p.F.end(), t.star(a)))
            r.fail("adjoint_closed", "adjoint of handle " + std::to_string(a) + " missing from F");
    if (!(p.eps > 0.0)) r.fail("eps", "eps must be positive");
    if (p.psi.size() != p.F.size()) r.fail("domain", "psi is not defined exactly on F");
    const std::size_t n = p.dim();
    const auto hplus = linalg::range_projection(p.h).resized(n);
    const auto s = corner_projection(p.h, p.R, n);
    for (Handle a : p.F) {
        if (!p.has(a)) continue;
        const auto& v = p.at(a);
        if (v.tail() != Tail::Zero) r.fail("corner", "psi(" + std::to_string(a) + ") has identity tail");
        else if (!identical(s * v * hplus, v))
            r.fail("corner", "psi(" + std::to_string(a) + ") is not in S_{R,h} B(H) h+");
    }
    if (p.has(0) && !identical(p.at(0), hplus)) r.fail("unital", "psi(1) != h+");
    return r;
}

/// Every clause of the promise attached to p.
inline CheckReport promise_check(const pres::HandleTable& t, const EACondition& p, const Promise& promise,
                                 const Tolerances& tol = {}) {
    CheckReport r;
    const auto& A = t.algebra();
    const std::size_t n = promise.phi.closure(p.dim());
    const Matrix hplus = linalg::range_projection(p.h).padded(n);
    const Matrix hminus = linalg::one_eigenspace_projection(p.h).padded(n);
    const Matrix k = promise.k_projection().padded(n);
    const Matrix id = detail::identity(n);
    using linalg::multiply;
    using linalg::spectral_norm;

    if (multiply(hminus, k) != k) r.fail("k_form", "k is not below h-");
    if (!p.has(0) || p.at(0).padded(n) != hplus) r.fail("unital", "psi(1) != h+");

    double Mp = rel::linear_constant(rel::relations_within(t, p.F));
    for (Handle a : p.F) Mp = std::max({Mp, 3.0 * A.norm(t[a]), 3.0 * linalg::operator_norm(p.at(a))});
    const double bound_c = p.eps / (3.0 * Mp);
    for (Handle a : p.F) {
        const Matrix psi = p.at(a).padded(n);
        const Matrix phi = promise.phi.matrix(t[a], n);
        const std::string tag = "(" + std::to_string(a) + ")";
        const double c = spectral_norm(multiply(psi - phi, hplus - k));
        if (!strictly_below(c, bound_c, tol.margin))
            r.fail("promise_defect", "||(psi - Phi)(h+ - k)||" + tag + " = " + detail::fmt(c) + " not below eps/3M_p = " +
                                         detail::fmt(bound_c));
        const double na = A.norm(t[a]);
        const double d = std::max(spectral_norm(psi + multiply(phi, id - hplus)), na);
        if (!strictly_below(d, 1.5 * na, tol.margin))
            r.fail("norm_bound", "||psi + Phi(1 - h+)||" + tag + " = " + detail::fmt(d) + " not below 3/2 ||a|| = " +
                                     detail::fmt(1.5 * na));
        if (multiply(id - hminus, multiply(psi, k)).cwiseAbs().maxCoeff() != 0.0 ||
            multiply(id - hplus, multiply(psi, hminus)).cwiseAbs().maxCoeff() != 0.0)
            r.fail("psi_inclusions", "psi" + tag + " does not map k into h- and h- into h+");
        const double f1 = spectral_norm(multiply(id - hminus, multiply(phi, k)));
        const double f2 = spectral_norm(multiply(id - hplus, multiply(phi, hminus)));
        if (f1 > tol.inclusion || f2 > tol.inclusion)
            r.fail("phi_inclusions", "Phi" + tag + " leaks " + detail::fmt(std::max(f1, f2)) + " out of h-/h+");
    }
    return r;
}

inline CheckReport promise_check(const pres::HandleTable& t, const EACondition& p, const Tolerances& tol = {}) {
    if (!p.promise) {
        CheckReport r;
        r.fail("promise", "no promise attached");
        return r;
    }
    return promise_check(t, p, *p.promise, tol);
}

/// Is p below q?
inline CheckReport ea_order_check(const pres::HandleTable& t, const EACondition& p, const EACondition& q,
                                  const Tolerances& tol = {}) {
    CheckReport r;
    if (!std::includes(p.F.begin(), p.F.end(), q.F.begin(), q.F.end())) r.fail("domain", "F_q is not contained in F_p");
    if (!(p.eps < q.eps)) r.fail("eps", "eps_p < eps_q fails");
    const std::size_t n = std::max(p.dim(), q.dim());
    const auto hp = p.h.op().resized(n), hq = q.h.op().resized(n);
    if (!linalg::way_above(hp, hq, 0.0)) r.fail("way_above", "h_p h_q != h_q");
    if (!(p.R.n >= q.R.n)) r.fail("projection", "R_p < R_q");
    if (!r.holds() && r.has("domain")) return r;

    const auto hq_plus = linalg::range_projection(q.h).resized(n);
    const auto hq_minus = linalg::one_eigenspace_projection(q.h).resized(n);
    for (Handle a : q.F) {
        const auto pa = p.at(a).resized(n), qa = q.at(a).resized(n);
        if (!identical(pa * hq_plus, qa))
            r.fail("column_restriction", "psi_p(" + std::to_string(a) + ") h_q+ != psi_q(" + std::to_string(a) + ")");
        if (!identical(hq_minus * pa, hq_minus * qa))
            r.fail("row_restriction", "h_q- psi_p(" + std::to_string(a) + ") != h_q- psi_q(" + std::to_string(a) + ")");
    }
    const auto window = linalg::one_eigenspace_projection(p.h).resized(n) - hq_minus;
    const auto rels = rel::relations_within(t, q.F);
    const auto d = measure_defects(rels, [&](Handle h) -> const TruncatedOperator& { return p.at(h); }, window);
    const double bound = q.eps - p.eps;
    if (!strictly_below(d.max_additive(), bound, tol.margin))
        r.fail("additive", "additive defect " + detail::fmt(d.max_additive()) + " not below " + detail::fmt(bound));
    if (!strictly_below(d.max_adjoint(), bound, tol.margin))
        r.fail("adjoint", "adjoint defect " + detail::fmt(d.max_adjoint()) + " not below " + detail::fmt(bound));
    if (!strictly_below(d.max_product(), bound, tol.margin))
        r.fail("multiplicative", "multiplicative defect " + detail::fmt(d.max_product()) + " not below " + detail::fmt(bound));
    return r;
}

}  // namespace cqforce::ea
