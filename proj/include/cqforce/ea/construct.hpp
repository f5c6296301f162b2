#pragma once

#include <cmath>
#include <limits>
#include <set>

#include "cqforce/ea/condition.hpp"
#include "cqforce/linalg/dyadic.hpp"
#include "cqforce/linalg/perturb.hpp"

namespace cqforce::ea {

struct BuildParams {
    int bits = 40;               // quantizer resolution 2^-bits
    std::size_t truncation = 512;
    Tolerances tol{};
};

/// Slack bookkeeping of a constructed condition.
struct BuildTrace {
    double gamma = 0.0;
    std::string binding;  // constraint attaining gamma
    double delta = 0.0;
    double M = 0.0;
    double u_distance = 0.0;  // ||T - l||
    double v_distance = 0.0;  // ||Q - Q'||
    int bits = 0;
};

namespace detail {

using Coords = std::vector<std::size_t>;

inline Coords prefix(std::size_t n) {
    Coords c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = i;
    return c;
}

inline Coords set_union(const Coords& a, const Coords& b) {
    Coords out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline Coords set_minus(const Coords& a, const Coords& b) {
    Coords out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Coordinates of h+ and h- for a coordinate spectral form.
struct CoordForm {
    Coords plus;
    Coords minus;
};

inline CoordForm coord_form(const SpectralContraction& h) {
    const auto form = h.coordinate_form();
    if (!form) throw UnsupportedPresentation("construction requires coordinate-aligned spectral forms");
    CoordForm c;
    for (std::size_t i = 0; i < h.blocks().size(); ++i) {
        c.plus = set_union(c.plus, (*form)[i]);
        if (h.blocks()[i].eigenvalue == linalg::Rational{1, 1}) c.minus = (*form)[i];
    }
    return c;
}

inline Matrix mask(std::size_t n, const Coords& c) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (auto i : c)
        if (i < n) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    return m;
}

inline std::size_t end_of(const Coords& c) { return c.empty() ? 0 : c.back() + 1; }

/// Projection onto the span of the given columns, with its coordinate approximation
/// {i : P_ii >= 1/2} joined with `base`.
struct SpanResult {
    Matrix projection;
    std::size_t rank = 0;
    Coords coords;
};

inline SpanResult span_of(const Matrix& columns, const Coords& base) {
    const Matrix basis = linalg::orthonormal_span(columns);
    SpanResult s;
    s.projection = linalg::multiply(basis, basis.adjoint());
    s.rank = static_cast<std::size_t>(basis.cols());
    Coords c;
    for (Eigen::Index i = 0; i < s.projection.rows(); ++i)
        if (s.projection(i, i).real() >= 0.5) c.push_back(static_cast<std::size_t>(i));
    s.coords = set_union(c, base);
    return s;
}

/// Unitary moving the projection onto `coords`; exact identity when already there.
inline TruncatedOperator align(const Matrix& projection, const Coords& coords, double eps, double& distance,
                               const std::string& what) {
    const std::size_t n = static_cast<std::size_t>(projection.rows());
    const Matrix target = mask(n, coords);
    distance = linalg::spectral_norm(projection - target);
    if (distance <= 1e-13) return TruncatedOperator::identity(n);
    const Matrix clean = 0.5 * (projection + projection.adjoint());
    try {
        return linalg::perturb_projection(TruncatedOperator(clean), TruncatedOperator(target), eps);
    } catch (const PerturbationTooLarge& e) {
        throw SlackExhausted(what, e.what());
    }
}

inline SpectralContraction coordinate_contraction(std::size_t n, const Coords& one, const Coords& half) {
    return SpectralContraction::coordinate(n, {{linalg::Rational{1, 1}, one}, {linalg::Rational{1, 2}, half}});
}

inline std::vector<Handle> star_closure(const pres::HandleTable& t, std::vector<Handle> F) {
    const std::size_t n = F.size();
    for (std::size_t i = 0; i < n; ++i) F.push_back(t.star(F[i]));
    F.push_back(0);
    std::sort(F.begin(), F.end());
    F.erase(std::unique(F.begin(), F.end()), F.end());
    return F;
}

/// Smallest n >= lo with ||(1 - R_n) C||_F < bound for every C.
inline std::size_t tail_cut(const std::vector<Matrix>& images, std::size_t lo, double bound) {
    std::size_t rows = 0;
    for (const auto& m : images) rows = std::max(rows, static_cast<std::size_t>(m.rows()));
    for (std::size_t n = lo; n <= rows; ++n) {
        bool ok = true;
        for (const auto& m : images) {
            double tail = 0.0;
            for (Eigen::Index i = static_cast<Eigen::Index>(n); i < m.rows(); ++i) tail += m.row(i).squaredNorm();
            if (!(std::sqrt(tail) < bound)) {
                ok = false;
                break;
            }
        }
        if (ok) return n;
    }
    return std::max(lo, rows);
}

/// Quantizes phi into S psi h+ and imposes the exact clauses.
struct Assembly {
    std::size_t n;
    Coords S;        // rows allowed
    Coords hplus;    // columns allowed
    Coords hminus;
    Coords k;
    int bits;
};

inline Matrix assemble(const Assembly& as, const Matrix& phi, const TruncatedOperator* old, const Coords& old_plus,
                       const Coords& old_minus) {
    const auto n = static_cast<Eigen::Index>(as.n);
    Matrix m = linalg::quantize(phi, as.bits);
    std::vector<char> rows(as.n, 0), cols(as.n, 0), minus(as.n, 0), kk(as.n, 0), plus(as.n, 0);
    for (auto i : as.S) rows[i] = 1;
    for (auto i : as.hplus) cols[i] = plus[i] = 1;
    for (auto i : as.hminus) minus[i] = 1;
    for (auto i : as.k) kk[i] = 1;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            bool zero = !rows[ui] || !cols[uj];
            if (kk[uj] && !minus[ui]) zero = true;
            if (minus[uj] && !plus[ui]) zero = true;
            if (zero) m(i, j) = 0.0;
        }
    if (old) {
        const Matrix o = old->padded(as.n);
        for (auto j : old_plus) m.col(static_cast<Eigen::Index>(j)) = o.col(static_cast<Eigen::Index>(j));
        for (auto i : old_minus) m.row(static_cast<Eigen::Index>(i)) = o.row(static_cast<Eigen::Index>(i));
    }
    return m;
}

}  // namespace detail

/// Root condition: F = {1}, h the projection onto the first faithful block,
/// psi(1) = h+, promise (h, Phi). A nonzero angle tilts Phi by a rotation in
/// the plane of e_{2d-1}, e_{2d}, which straddles a block boundary beyond h+.
inline EACondition ea_root(const pres::HandleTable& t, double eps, double angle = 0.0) {
    if (!(eps > 0.0)) throw ValidationError("root eps must be positive");
    const std::size_t d = t.algebra().block_size();
    EACondition p;
    p.F = {0};
    p.eps = eps;
    p.h = detail::coordinate_contraction(d, detail::prefix(d), {});
    p.R = BasisProjection{0};
    p.psi.emplace(0, TruncatedOperator::identity(d, Tail::Zero));
    TruncatedOperator u = TruncatedOperator::identity(1);
    if (angle != 0.0) {
        Matrix m = Matrix::Identity(static_cast<Eigen::Index>(2 * d + 1), static_cast<Eigen::Index>(2 * d + 1));
        const auto a = static_cast<Eigen::Index>(2 * d - 1), b = static_cast<Eigen::Index>(2 * d);
        m(a, a) = std::cos(angle);
        m(b, b) = std::cos(angle);
        m(b, a) = std::sin(angle);
        m(a, b) = -std::sin(angle);
        u = TruncatedOperator(m, Tail::Identity);
    }
    p.promise = Promise{p.h, LazyRepresentation(t.algebra(), u)};
    return p;
}

namespace detail {

struct Slack {
    double gamma;
    std::string binding;
    double delta;
};

/// delta strictly between N(q) and eps_q/3M_q, and the resulting gamma bound terms.
inline void promise_slack(const ConstantBundle& c, double eps, double& delta, double& bound) {
    const double top = eps / (3.0 * c.M_p);
    if (!(c.N < top)) throw ValidationError("promise fails N < eps/3M");
    delta = c.N + (top - c.N) / 16.0;
    bound = eps - 3.0 * c.M_p * delta;
}

inline void take_min(Slack& s, double value, const std::string& name) {
    if (value < s.gamma) {
        s.gamma = value;
        s.binding = name;
    }
}

}  // namespace detail

/// Member of D_{F, eps, h, R} below q.
inline EACondition ea_extend(const pres::HandleTable& t, const EACondition& q, const std::vector<Handle>& F_req,
                             double eps, const SpectralContraction& h_target, const BasisProjection& R_target,
                             const BuildParams& params = {}, BuildTrace* trace = nullptr) {
    using namespace detail;
    using linalg::multiply;
    if (!q.promise) throw ValidationError("q carries no promise");
    if (!(eps > 0.0)) throw ValidationError("requested eps must be positive");
    for (Handle a : F_req) t.check(a);
    {
        const auto pc = promise_check(t, q, params.tol);
        if (!pc.holds()) throw ValidationError("promise of q is invalid: " + pc.violations.front().detail);
    }
    const auto& A = t.algebra();
    const Promise& pq = *q.promise;
    const auto qform = coord_form(q.h);

    std::vector<Handle> F = F_req;
    F.insert(F.end(), q.F.begin(), q.F.end());
    F = star_closure(t, F);

    const auto cq = ea_constants(t, q, q.F, pq);
    Slack s{eps, "eps", 0.0};
    double promise_bound = 0.0;
    promise_slack(cq, q.eps, s.delta, promise_bound);
    take_min(s, promise_bound, "eps_q - 3 M_q delta");
    take_min(s, cq.D, "D(q, Phi_q)");
    for (Handle a : F) take_min(s, A.norm(t[a]), "||a||");
    if (!(s.gamma > 0.0)) throw SlackExhausted(s.binding, "gamma = " + detail::fmt(s.gamma));
    const double gamma = s.gamma;
    const auto cF = ea_constants(t, q, F, pq);
    const double M = cF.M_pF;
    const double J = std::max(cF.J, 1e-300);

    // k: prefix way above h_target, h_q and R_q.
    const std::size_t K = std::max({detail::support_end(linalg::range_projection(h_target).entries()),
                                    end_of(qform.plus), q.R.n, std::size_t{1}});
    const Coords k = prefix(K);

    // T = span Phi(a) k, aligned onto coordinates l.
    const LazyRepresentation& phi_q = pq.phi;
    const std::size_t n0 = phi_q.closure(K);
    if (n0 > params.truncation) throw SizeError("working corner exceeds truncation");
    Matrix cols(static_cast<Eigen::Index>(n0), 0);
    auto stack = [](Matrix& acc, const Matrix& block) {
        Matrix next(acc.rows(), acc.cols() + block.cols());
        next << acc, block;
        acc = std::move(next);
    };
    for (Handle a : F) stack(cols, phi_q.matrix(t[a], n0).leftCols(static_cast<Eigen::Index>(K)));
    const auto T = span_of(cols, k);
    if (T.coords.size() != T.rank) throw SlackExhausted("coordinate approximation", "span of Phi(a) k is not close to a coordinate subspace");
    double u_dist = 0.0;
    const TruncatedOperator u = align(T.projection, T.coords, gamma / (36.0 * M * J), u_dist, "alignment of T");
    const Coords l = T.coords;
    const LazyRepresentation phi1 = phi_q.conjugated(u);

    // Q = span Phi'(a) l, aligned onto coordinates Q' containing l.
    const std::size_t n1 = phi1.closure(end_of(l));
    if (n1 > params.truncation) throw SizeError("working corner exceeds truncation");
    Matrix qcols(static_cast<Eigen::Index>(n1), 0);
    for (Handle a : F) {
        const Matrix m = phi1.matrix(t[a], n1);
        for (auto j : l) stack(qcols, m.col(static_cast<Eigen::Index>(j)));
    }
    const auto Q = span_of(qcols, l);
    if (Q.coords.size() != Q.rank) throw SlackExhausted("coordinate approximation", "span of Phi(a) l is not close to a coordinate subspace");
    double v_dist = 0.0;
    const TruncatedOperator v = align(Q.projection, Q.coords, 1.0, v_dist, "alignment of Q");
    const LazyRepresentation phi_p = phi1.conjugated(v);
    const Coords hp_plus = Q.coords, hp_minus = l;

    // R_p: smallest admissible prefix.
    const std::size_t n2 = phi_p.closure(end_of(hp_plus));
    std::vector<Matrix> images;
    for (Handle a : F) images.push_back(multiply(phi_p.matrix(t[a], n2), mask(n2, hp_plus)));
    const std::size_t Rp = tail_cut(images, std::max(R_target.n, q.R.n), gamma / (18.0 * M));

    const std::size_t nw = std::max({n2, Rp, q.dim(), K});
    if (nw > params.truncation) throw SizeError("working corner exceeds truncation");
    const Matrix id = identity(nw);
    const Matrix Pp = mask(nw, hp_plus), Pm = mask(nw, hp_minus), Qp = mask(nw, qform.plus), Qm = mask(nw, qform.minus);
    const Matrix Rm = mask(nw, prefix(Rp));

    EACondition p;
    p.F = F;
    p.eps = gamma / 6.0;
    p.h = coordinate_contraction(nw, hp_minus, set_minus(hp_plus, hp_minus));
    p.R = BasisProjection{Rp};
    p.promise = Promise{coordinate_contraction(nw, k, {}), phi_p};

    Assembly as{nw, set_union(hp_plus, prefix(Rp)), hp_plus, hp_minus, k, params.bits};
    for (int attempt = 0; attempt < 2; ++attempt) {
        p.psi.clear();
        for (Handle a : F) {
            const Matrix fa = phi_p.matrix(t[a], nw);
            Matrix phi;
            if (q.has(a)) {
                phi = q.at(a).padded(nw) + multiply(id - Qm, multiply(fa, Pm - Qp)) +
                      multiply(id - Qm, multiply(Rm, multiply(fa, Pp - Pm)));
                p.psi.emplace(a, TruncatedOperator(assemble(as, phi, &q.at(a), qform.plus, qform.minus)));
            } else {
                phi = multiply(fa, Pm) + multiply(Rm, multiply(fa, Pp - Pm));
                p.psi.emplace(a, TruncatedOperator(assemble(as, phi, nullptr, {}, {})));
            }
        }
        p.psi[0] = TruncatedOperator(Pp);
        const auto pc = promise_check(t, p, params.tol);
        if (pc.holds()) break;
        if (attempt == 1 || !pc.has("promise_defect") || as.bits + 8 > 52)
            throw SlackExhausted(pc.violations.front().clause, pc.violations.front().detail);
        as.bits += 8;
    }
    const auto oc = ea_order_check(t, p, q, params.tol);
    if (!oc.holds()) throw SlackExhausted(oc.violations.front().clause, oc.violations.front().detail);
    if (trace) *trace = BuildTrace{gamma, s.binding, s.delta, M, u_dist, v_dist, as.bits};
    return p;
}

/// Common extension of p and q under the compatibility hypotheses.
inline EACondition ea_amalgamate(const pres::HandleTable& t, const EACondition& p, const EACondition& q,
                                 const BuildParams& params = {}, BuildTrace* trace = nullptr) {
    using namespace detail;
    using linalg::multiply;
    if (!p.promise || !q.promise) throw IncompatiblePresentation("promise", "both conditions need promises");
    const std::size_t n = std::max(p.dim(), q.dim());
    if (!identical(p.h.op().resized(n), q.h.op().resized(n))) throw IncompatiblePresentation("h", "h_p != h_q");
    if (!(p.R == q.R)) throw IncompatiblePresentation("R", "R_p != R_q");
    if (!identical(p.promise->k_projection().resized(n), q.promise->k_projection().resized(n)))
        throw IncompatiblePresentation("k", "promises do not share k");
    for (const auto& [a, v] : p.psi)
        if (q.has(a) && !identical(v.resized(n), q.at(a).resized(n)))
            throw IncompatiblePresentation("agreement", "psi_p and psi_q differ on handle " + std::to_string(a));
    const auto& A = t.algebra();
    const auto form = coord_form(p.h);
    const Promise& pp = *p.promise;
    const Promise& pq = *q.promise;

    std::vector<Handle> F = p.F;
    F.insert(F.end(), q.F.begin(), q.F.end());
    F = star_closure(t, F);

    const auto cp = ea_constants(t, p, p.F, pp);
    const auto cq = ea_constants(t, q, q.F, pq);
    Slack s{std::numeric_limits<double>::infinity(), "", 0.0};
    double bp = 0.0, bq = 0.0, dp = 0.0, dq = 0.0;
    try {
        promise_slack(cp, p.eps, dp, bp);
        promise_slack(cq, q.eps, dq, bq);
    } catch (const ValidationError& e) {
        throw IncompatiblePresentation("promise", e.what());
    }
    s.delta = std::max(dp, dq);
    take_min(s, bp, "eps_p - 3 M_p delta");
    take_min(s, bq, "eps_q - 3 M_q delta");
    take_min(s, cp.D, "D(p, Phi_p)");
    take_min(s, cq.D, "D(q, Phi_q)");
    for (Handle a : F) take_min(s, A.norm(t[a]), "||a||");
    if (!(s.gamma > 0.0)) throw SlackExhausted(s.binding, "gamma = " + detail::fmt(s.gamma));
    const double gamma = s.gamma;
    const double M = std::max(ea_constants(t, p, F, pp).M_pF, ea_constants(t, q, F, pq).M_pF);
    const double J = std::max(ea_constants(t, p, F, pp).J, 1e-300);

    const LazyRepresentation theta(A);
    const std::size_t nc = std::max(pp.phi.closure(n), pq.phi.closure(n));
    for (Handle a : p.F) {
        if (!q.has(a)) continue;
        const double diff = linalg::spectral_norm(pp.phi.matrix(t[a], nc) - pq.phi.matrix(t[a], nc));
        if (!(diff < gamma / (18.0 * M)))
            throw IncompatiblePresentation("representations", "||Phi_p(a) - Phi_q(a)|| = " + detail::fmt(diff) +
                                                                  " not below gamma/18M on handle " + std::to_string(a));
    }

    // Shared k: block-aligned prefix beyond h, R and both alignments.
    const std::size_t K = theta.closure(std::max({end_of(form.plus), p.R.n, pp.phi.alignment().dim(),
                                                  pq.phi.alignment().dim(), std::size_t{1}}));
    const Coords k = prefix(K);
    const std::size_t n0 = std::max({pp.phi.closure(K), pq.phi.closure(K), theta.closure(K)});
    if (n0 > params.truncation) throw SizeError("working corner exceeds truncation");

    auto stack = [](Matrix& acc, const Matrix& block) {
        Matrix next(acc.rows(), acc.cols() + block.cols());
        next << acc, block;
        acc = std::move(next);
    };
    Matrix cols(static_cast<Eigen::Index>(n0), 0);
    for (Handle a : p.F) stack(cols, pp.phi.matrix(t[a], n0).leftCols(static_cast<Eigen::Index>(K)));
    for (Handle a : q.F) stack(cols, pq.phi.matrix(t[a], n0).leftCols(static_cast<Eigen::Index>(K)));
    for (Handle a : F) stack(cols, theta.matrix(t[a], n0).leftCols(static_cast<Eigen::Index>(K)));
    const auto T = span_of(cols, k);
    if (T.coords.size() != T.rank) throw SlackExhausted("coordinate approximation", "span of Phi(a) k is not close to a coordinate subspace");
    double u_dist = 0.0;
    const TruncatedOperator u = align(T.projection, T.coords, gamma / (36.0 * M * J), u_dist, "alignment of T");
    const Coords l = T.coords;

    const LazyRepresentation p1 = pp.phi.conjugated(u), q1 = pq.phi.conjugated(u), th1 = theta.conjugated(u);
    const std::size_t n1 = std::max({p1.closure(end_of(l)), q1.closure(end_of(l)), th1.closure(end_of(l))});
    if (n1 > params.truncation) throw SizeError("working corner exceeds truncation");
    Matrix qcols(static_cast<Eigen::Index>(n1), 0);
    auto add_cols = [&](const LazyRepresentation& r, const std::vector<Handle>& hs) {
        for (Handle a : hs) {
            const Matrix m = r.matrix(t[a], n1);
            for (auto j : l) stack(qcols, m.col(static_cast<Eigen::Index>(j)));
        }
    };
    add_cols(p1, p.F);
    add_cols(q1, q.F);
    add_cols(th1, F);
    const auto Q = span_of(qcols, l);
    if (Q.coords.size() != Q.rank) throw SlackExhausted("coordinate approximation", "span of Phi(a) l is not close to a coordinate subspace");
    double v_dist = 0.0;
    const TruncatedOperator v = align(Q.projection, Q.coords, 1.0, v_dist, "alignment of Q");
    const LazyRepresentation p2 = p1.conjugated(v), q2 = q1.conjugated(v), th2 = th1.conjugated(v);
    const Coords hs_plus = Q.coords, hs_minus = l;

    const std::size_t n2 = std::max({p2.closure(end_of(hs_plus)), q2.closure(end_of(hs_plus)), th2.closure(end_of(hs_plus))});
    std::vector<Matrix> images;
    for (Handle a : F) {
        images.push_back(multiply(th2.matrix(t[a], n2), mask(n2, hs_plus)));
        if (p.has(a)) images.push_back(multiply(p2.matrix(t[a], n2), mask(n2, hs_plus)));
        if (q.has(a)) images.push_back(multiply(q2.matrix(t[a], n2), mask(n2, hs_plus)));
    }
    const std::size_t Rs = tail_cut(images, p.R.n, gamma / (18.0 * M));

    const std::size_t nw = std::max({n2, Rs, n, K});
    if (nw > params.truncation) throw SizeError("working corner exceeds truncation");
    const Matrix id = identity(nw);
    const Matrix Sp = mask(nw, hs_plus), Sm = mask(nw, hs_minus), Hp = mask(nw, form.plus), Hm = mask(nw, form.minus);
    const Matrix Rm = mask(nw, prefix(Rs));

    EACondition out;
    out.F = F;
    out.eps = gamma / 6.0;
    out.h = coordinate_contraction(nw, hs_minus, set_minus(hs_plus, hs_minus));
    out.R = BasisProjection{Rs};
    out.promise = Promise{coordinate_contraction(nw, k, {}), th2};

    Assembly as{nw, set_union(hs_plus, prefix(Rs)), hs_plus, hs_minus, k, params.bits};
    for (int attempt = 0; attempt < 2; ++attempt) {
        out.psi.clear();
        for (Handle a : F) {
            const bool from_p = p.has(a);
            const EACondition& src = from_p ? p : q;
            const LazyRepresentation& rep = from_p ? p2 : q2;
            const Matrix fa = rep.matrix(t[a], nw);
            const Matrix phi = src.at(a).padded(nw) + multiply(id - Hm, multiply(fa, Sm - Hp)) +
                               multiply(id - Hm, multiply(Rm, multiply(fa, Sp - Sm)));
            out.psi.emplace(a, TruncatedOperator(assemble(as, phi, &src.at(a), form.plus, form.minus)));
        }
        out.psi[0] = TruncatedOperator(Sp);
        const auto pc = promise_check(t, out, params.tol);
        if (pc.holds()) break;
        if (attempt == 1 || !pc.has("promise_defect") || as.bits + 8 > 52)
            throw SlackExhausted(pc.violations.front().clause, pc.violations.front().detail);
        as.bits += 8;
    }
    for (const EACondition* base : {&p, &q}) {
        const auto oc = ea_order_check(t, out, *base, params.tol);
        if (!oc.holds()) throw SlackExhausted(oc.violations.front().clause, oc.violations.front().detail);
    }
    if (trace) *trace = BuildTrace{gamma, s.binding, s.delta, M, u_dist, v_dist, as.bits};
    return out;
}

}  // namespace cqforce::ea
