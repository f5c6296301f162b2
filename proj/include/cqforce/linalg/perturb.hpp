#pragma once

#include <cmath>
#include <vector>

#include "cqforce/linalg/operator.hpp"

namespace cqforce::linalg {

/// Distance ||T - S|| below which perturb_projection guarantees ||(u - 1)T|| < eps
/// for a projection T of rank n.
inline double admissibility_bound(double eps, std::size_t rank) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    if (rank == 0) return 0.5;
    return std::min(0.5, eps / (4.0 * std::sqrt(static_cast<double>(rank))));
}

namespace detail {

inline bool is_diagonal(const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (i != j && m(i, j) != Scalar(0.0, 0.0)) return false;
    return true;
}

/// Orthonormal basis of the range of a projection; standard vectors when diagonal.
inline Matrix range_basis(const Matrix& p) {
    const Eigen::Index n = p.rows();
    if (is_diagonal(p)) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (p(i, i).real() > 0.5) idx.push_back(i);
        Matrix b = Matrix::Zero(n, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) b(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
        return b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(p);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = n - 1; i >= 0; --i)
        if (es.eigenvalues()(i) > 0.5) idx.push_back(i);
    Matrix b(n, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(idx[j]);
    return b;
}

/// Gram-Schmidt of v against the columns of basis (twice for stability).
inline Vector orthogonalize(Vector v, const Matrix& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index k = 0; k < basis.cols(); ++k) v -= basis.col(k) * basis.col(k).dot(v);
    return v;
}

inline void append(Matrix& basis, const Vector& v) {
    basis.conservativeResize(basis.rows(), basis.cols() + 1);
    basis.col(basis.cols() - 1) = v;
}

}  // namespace detail

/// Unitary u, identity off a finite-dimensional subspace, with uT[H] contained in
/// S[H], ||(u - 1)T|| < eps, and u x = x whenever x lies in T[H] and S x = x.
/// T must be a finite-rank projection with ||T - S|| below admissibility_bound.
inline TruncatedOperator perturb_projection(const TruncatedOperator& t_op, const TruncatedOperator& s_op, double eps) {
    if (!is_projection(t_op)) throw ValidationError("T must be a finite-rank orthogonal projection");
    if (!is_projection(s_op)) throw ValidationError("S must be an orthogonal projection");
    const std::size_t n0 = std::max(t_op.dim(), s_op.dim());
    const Matrix t = t_op.padded(n0);
    const Matrix s = s_op.padded(n0);
    const Eigen::Index n = static_cast<Eigen::Index>(n0);

    const Matrix bt = detail::range_basis(t);
    const std::size_t rank = static_cast<std::size_t>(bt.cols());
    const double dist = spectral_norm(t - s);
    const double bound = admissibility_bound(eps, rank);
    if (dist >= bound) throw PerturbationTooLarge(dist, bound);

    // Fixed vectors of S inside T come first, taken verbatim when exact.
    Matrix xi(n, 0);
    Matrix rest(n, 0);
    for (Eigen::Index j = 0; j < bt.cols(); ++j) {
        const Vector col = bt.col(j);
        if ((multiply(s, col) - col).cwiseAbs().maxCoeff() == 0.0)
            detail::append(xi, col);
        else
            detail::append(rest, col);
    }
    const Eigen::Index exact_fixed = xi.cols();
    if (rest.cols() > 0) {
        const Matrix defect = multiply(s - Matrix::Identity(n, n), rest);
        Eigen::JacobiSVD<Matrix> svd(defect, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const Matrix v = svd.matrixV();
        Matrix moving(n, 0);
        for (Eigen::Index k = 0; k < v.cols(); ++k) {
            const double sigma = k < sv.size() ? sv(k) : 0.0;
            Vector w = detail::orthogonalize(rest * v.col(k), xi);
            const double len = w.norm();
            if (len < 1e-12) continue;
            w /= len;
            if (sigma <= 1e-13)
                detail::append(xi, w);
            else
                detail::append(moving, w);
        }
        for (Eigen::Index k = 0; k < moving.cols(); ++k) detail::append(xi, moving.col(k));
    }
    if (static_cast<std::size_t>(xi.cols()) != rank) throw ValidationError("failed to orthonormalize range of T");

    // eta_i: Gram-Schmidt of S xi_i; fixed vectors map to themselves.
    Matrix eta(n, 0);
    for (Eigen::Index i = 0; i < xi.cols(); ++i) {
        const Vector col = xi.col(i);
        const Vector sx = multiply(s, col);
        if (i < exact_fixed || (sx - col).norm() <= 1e-13) {
            detail::append(eta, col);
            continue;
        }
        Vector w = detail::orthogonalize(sx, eta);
        const double len = w.norm();
        if (len < 1e-12) throw PerturbationTooLarge(dist, bound);
        detail::append(eta, w / len);
    }

    // Complete both bases on V = span(T[H] + S T[H]) using the same vectors.
    Matrix extra(n, 0);
    for (Eigen::Index i = 0; i < eta.cols(); ++i) {
        Vector w = detail::orthogonalize(eta.col(i), xi);
        w = detail::orthogonalize(w, extra);
        const double len = w.norm();
        if (len > 1e-12) detail::append(extra, w / len);
    }
    for (Eigen::Index i = 0; i < extra.cols(); ++i) {
        const Vector col = extra.col(i);
        Vector w = detail::orthogonalize(col, eta);
        const double len = w.norm();
        if (len < 1e-12) throw PerturbationTooLarge(dist, bound);
        detail::append(eta, w / len);
        detail::append(xi, col);
    }

    Matrix u = Matrix::Identity(n, n);
    for (Eigen::Index i = 0; i < xi.cols(); ++i) {
        if (xi.col(i) == eta.col(i)) continue;
        u += (eta.col(i) - xi.col(i)) * xi.col(i).adjoint();
    }
    TruncatedOperator result(std::move(u), Tail::Identity);

    const double moved = spectral_norm(multiply(result.entries() - Matrix::Identity(n, n), t));
    if (!(moved < eps)) throw PerturbationTooLarge(dist, bound);
    return result;
}

}  // namespace cqforce::linalg
