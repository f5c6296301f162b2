#pragma once

#include "cqforce/linalg/operator.hpp"
#include "cqforce/presentations.hpp"

namespace cqforce::ea {

using linalg::Matrix;
using linalg::Tail;
using linalg::TruncatedOperator;

/// Faithful essential unital representation of a finite-dimensional algebra:
/// the canonical faithful block repeated along the basis with infinite
/// multiplicity, conjugated by a unitary that differs from the identity on a
/// finite-dimensional subspace only.
class LazyRepresentation {
public:
    LazyRepresentation() : dims_{1}, d_(1), alignment_(TruncatedOperator::identity(1)) {}

    explicit LazyRepresentation(const pres::FinDimCStar& A, TruncatedOperator alignment = TruncatedOperator::identity(1))
        : dims_(A.dims()), d_(A.block_size()), alignment_(std::move(alignment)) {
        if (alignment_.tail() != Tail::Identity) throw ValidationError("alignment must have identity tail");
        const Matrix& u = alignment_.entries();
        const auto n = u.rows();
        if ((u.adjoint() * u - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
            throw ValidationError("alignment is not unitary");
    }

    std::size_t block_size() const noexcept { return d_; }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    const TruncatedOperator& alignment() const noexcept { return alignment_; }

    /// Smallest multiple of the block size that is at least n and covers the
    /// alignment; R_m then reduces Phi(a) for every a.
    std::size_t closure(std::size_t n) const {
        const std::size_t m = std::max({n, alignment_.dim(), std::size_t{1}});
        return ((m + d_ - 1) / d_) * d_;
    }

    /// R_n Phi(a) R_n.
    Matrix matrix(const pres::Element& a, std::size_t n) const {
        const std::size_t m = closure(n);
        const Matrix amp = amplified(a, m);
        if (alignment_.entries().isIdentity(0.0))
            return amp.topLeftCorner(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        const Matrix u = alignment_.padded(m);
        const Matrix full = linalg::multiply(u, linalg::multiply(amp, u.adjoint()));
        return full.topLeftCorner(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    }

    /// Block-diagonal amplification of a on C^m, m a multiple of the block size.
    Matrix amplified(const pres::Element& a, std::size_t m) const {
        if (m % d_ != 0) throw DomainError("amplification size must be block aligned");
        const auto mi = static_cast<Eigen::Index>(m);
        Matrix out = Matrix::Zero(mi, mi);
        for (Eigen::Index off = 0; off < mi; off += static_cast<Eigen::Index>(d_)) {
            Eigen::Index o = off;
            for (const auto& b : a.blocks) {
                out.block(o, o, b.rows(), b.cols()) = b;
                o += b.rows();
            }
        }
        return out;
    }

    /// Ad w composed with this representation.
    LazyRepresentation conjugated(const TruncatedOperator& w) const {
        LazyRepresentation r = *this;
        r.alignment_ = w * alignment_;
        return r;
    }

private:
    std::vector<std::size_t> dims_;
    std::size_t d_;
    TruncatedOperator alignment_;
};

}  // namespace cqforce::ea
