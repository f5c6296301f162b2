#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "cqforce/errors.hpp"

namespace cqforce::linalg {

using Scalar = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Tail { Zero, Identity };

/// Deterministic product. Every entry accumulates over the inner index in
/// ascending order and skips exact zeros, so products whose terms vanish
/// structurally come out as exact zeros.
inline Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ValidationError("multiply: inner dimensions differ");
    Matrix c = Matrix::Zero(a.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            const Scalar s = b(k, j);
            if (s == Scalar(0.0, 0.0)) continue;
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                const Scalar t = a(i, k);
                if (t == Scalar(0.0, 0.0)) continue;
                c(i, j) += t * s;
            }
        }
    }
    return c;
}

/// Largest singular value, computed on the submatrix of nonzero rows and columns.
inline double spectral_norm(const Matrix& m) {
    std::vector<Eigen::Index> rows, cols;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (m.row(i).cwiseAbs().maxCoeff() > 0.0) rows.push_back(i);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (m.col(j).cwiseAbs().maxCoeff() > 0.0) cols.push_back(j);
    if (rows.empty() || cols.empty()) return 0.0;
    Matrix t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    if (t.rows() == 1 || t.cols() == 1) return t.norm();
    if (std::max(t.rows(), t.cols()) > 48) {
        Eigen::BDCSVD<Matrix> svd(t);
        return svd.singularValues()(0);
    }
    Eigen::JacobiSVD<Matrix> svd(t);
    return svd.singularValues()(0);
}

/// Operator on l^2(N): an n x n block on the span of e_0..e_{n-1} plus a
/// tail that is either 0 or the identity on the complement.
class TruncatedOperator {
public:
    TruncatedOperator() : entries_(Matrix::Zero(1, 1)), tail_(Tail::Zero) {}

    explicit TruncatedOperator(Matrix entries, Tail tail = Tail::Zero)
        : entries_(std::move(entries)), tail_(tail) {
        if (entries_.rows() != entries_.cols())
            throw ValidationError("operator block must be square");
        if (entries_.rows() < 1) throw ValidationError("operator dimension must be positive");
        if (!entries_.allFinite()) throw ValidationError("operator has non-finite entries");
    }

    static TruncatedOperator zero(std::size_t n) {
        return TruncatedOperator(Matrix::Zero(idx(n), idx(n)), Tail::Zero);
    }
    static TruncatedOperator identity(std::size_t n, Tail tail = Tail::Identity) {
        return TruncatedOperator(Matrix::Identity(idx(n), idx(n)), tail);
    }
    /// Projection onto span{e_i : i in coords}, represented in dimension n.
    static TruncatedOperator coordinate_projection(std::size_t n, const std::vector<std::size_t>& coords) {
        Matrix m = Matrix::Zero(idx(n), idx(n));
        for (auto c : coords) {
            if (c >= n) throw ValidationError("coordinate outside operator dimension");
            m(idx(c), idx(c)) = 1.0;
        }
        return TruncatedOperator(std::move(m), Tail::Zero);
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    Tail tail() const noexcept { return tail_; }
    const Matrix& entries() const noexcept { return entries_; }

    /// The block in dimension n >= dim(), extended by the tail.
    Matrix padded(std::size_t n) const {
        if (n < dim()) throw DomainError("cannot pad operator to a smaller dimension");
        Matrix m = (tail_ == Tail::Identity) ? Matrix(Matrix::Identity(idx(n), idx(n)))
                                             : Matrix(Matrix::Zero(idx(n), idx(n)));
        m.topLeftCorner(entries_.rows(), entries_.cols()) = entries_;
        return m;
    }
    TruncatedOperator resized(std::size_t n) const {
        return TruncatedOperator(padded(n), tail_);
    }

    TruncatedOperator adjoint() const { return TruncatedOperator(entries_.adjoint(), tail_); }

    TruncatedOperator scaled(Scalar s) const {
        if (tail_ == Tail::Identity && s != Scalar(1.0, 0.0))
            throw DomainError("scaling an identity tail is not representable");
        return TruncatedOperator(Matrix(entries_ * s), tail_);
    }

    friend TruncatedOperator operator+(const TruncatedOperator& a, const TruncatedOperator& b) {
        if (a.tail_ == Tail::Identity && b.tail_ == Tail::Identity)
            throw DomainError("sum of identity tails is not representable");
        const std::size_t n = std::max(a.dim(), b.dim());
        const Tail t = (a.tail_ == Tail::Identity || b.tail_ == Tail::Identity) ? Tail::Identity : Tail::Zero;
        return TruncatedOperator(Matrix(a.padded(n) + b.padded(n)), t);
    }
    friend TruncatedOperator operator-(const TruncatedOperator& a, const TruncatedOperator& b) {
        const std::size_t n = std::max(a.dim(), b.dim());
        Tail t = Tail::Zero;
        if (a.tail_ == Tail::Identity && b.tail_ == Tail::Zero) t = Tail::Identity;
        if (a.tail_ == Tail::Zero && b.tail_ == Tail::Identity)
            throw DomainError("negated identity tail is not representable");
        return TruncatedOperator(Matrix(a.padded(n) - b.padded(n)), t);
    }
    friend TruncatedOperator operator*(const TruncatedOperator& a, const TruncatedOperator& b) {
        const std::size_t n = std::max(a.dim(), b.dim());
        const Tail t = (a.tail_ == Tail::Identity && b.tail_ == Tail::Identity) ? Tail::Identity : Tail::Zero;
        return TruncatedOperator(multiply(a.padded(n), b.padded(n)), t);
    }

    /// Exact equality as operators on l^2(N).
    friend bool identical(const TruncatedOperator& a, const TruncatedOperator& b) {
        if (a.tail_ != b.tail_) return false;
        const std::size_t n = std::max(a.dim(), b.dim());
        return a.padded(n) == b.padded(n);
    }

private:
    static Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

    Matrix entries_;
    Tail tail_;
};

inline double operator_norm(const TruncatedOperator& t) {
    const double block = spectral_norm(t.entries());
    return t.tail() == Tail::Identity ? std::max(1.0, block) : block;
}

/// left * t * right, each factor padded to a common dimension.
inline TruncatedOperator corner_compress(const TruncatedOperator& t, const TruncatedOperator& left,
                                         const TruncatedOperator& right) {
    return left * t * right;
}

/// Range projection R_n onto span{e_0, ..., e_{n-1}}.
struct BasisProjection {
    std::size_t n = 0;

    TruncatedOperator op(std::size_t dim) const {
        if (dim < n) throw DomainError("basis projection wider than requested dimension");
        std::vector<std::size_t> coords(n);
        for (std::size_t i = 0; i < n; ++i) coords[i] = i;
        return TruncatedOperator::coordinate_projection(std::max<std::size_t>(dim, 1), coords);
    }
    friend bool operator==(const BasisProjection&, const BasisProjection&) = default;
};

inline bool is_projection(const TruncatedOperator& p, double tol = 1e-10) {
    if (p.tail() != Tail::Zero) return false;
    const Matrix& m = p.entries();
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    return (multiply(m, m) - m).cwiseAbs().maxCoeff() <= tol;
}

/// Orthonormal basis (columns) of the column span of m, singular values above tol.
inline Matrix orthonormal_span(const Matrix& m, double tol = 1e-10) {
    if (m.cols() == 0) return Matrix(m.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > tol) ++r;
    return svd.matrixU().leftCols(r);
}

/// Orthogonal projection onto the column span of an orthonormal basis, in dimension n.
inline TruncatedOperator projection_from_basis(const Matrix& basis, std::size_t n) {
    Matrix b = Matrix::Zero(static_cast<Eigen::Index>(n), basis.cols());
    b.topRows(basis.rows()) = basis;
    return TruncatedOperator(multiply(b, b.adjoint()), Tail::Zero);
}

}  // namespace cqforce::linalg
