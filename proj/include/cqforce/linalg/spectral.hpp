#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "cqforce/linalg/operator.hpp"

namespace cqforce::linalg {

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
};

/// Eigenvalue together with an orthonormal basis (columns) of its eigenspace.
struct EigenBlock {
    Rational eigenvalue;
    Matrix basis;
};

/// Finite-rank positive contraction given by its exact spectral decomposition.
/// Nonzero eigenvalues only; the kernel is implicit.
class SpectralContraction {
public:
    SpectralContraction() : dim_(1) {}

    SpectralContraction(std::size_t dim, std::vector<EigenBlock> blocks) : dim_(dim), blocks_(std::move(blocks)) {
        if (dim_ < 1) throw ValidationError("spectral contraction needs positive dimension");
        std::sort(blocks_.begin(), blocks_.end(),
                  [](const EigenBlock& a, const EigenBlock& b) { return b.eigenvalue < a.eigenvalue; });
        Eigen::Index total = 0;
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const auto& b = blocks_[i];
            if (b.eigenvalue.den <= 0 || b.eigenvalue.num <= 0 || b.eigenvalue.num > b.eigenvalue.den)
                throw ValidationError("eigenvalues must lie in (0, 1]");
            if (i > 0 && blocks_[i - 1].eigenvalue == b.eigenvalue)
                throw ValidationError("eigenvalues must be distinct");
            if (b.basis.rows() != static_cast<Eigen::Index>(dim_))
                throw ValidationError("eigenspace basis has wrong row count");
            if (!b.basis.allFinite()) throw ValidationError("eigenspace basis has non-finite entries");
            total += b.basis.cols();
        }
        Matrix all(static_cast<Eigen::Index>(dim_), total);
        Eigen::Index c = 0;
        for (const auto& b : blocks_) {
            all.middleCols(c, b.basis.cols()) = b.basis;
            c += b.basis.cols();
        }
        if (total > 0) {
            const Matrix gram = all.adjoint() * all;
            if ((gram - Matrix::Identity(total, total)).cwiseAbs().maxCoeff() > 1e-12)
                throw ValidationError("eigenspace bases are not jointly orthonormal");
        }
    }

    /// Spectral form whose eigenspaces are spanned by standard basis vectors.
    static SpectralContraction coordinate(std::size_t dim,
                                          const std::vector<std::pair<Rational, std::vector<std::size_t>>>& parts) {
        std::vector<EigenBlock> blocks;
        for (const auto& [value, coords] : parts) {
            if (coords.empty()) continue;
            Matrix b = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(coords.size()));
            for (std::size_t j = 0; j < coords.size(); ++j) {
                if (coords[j] >= dim) throw ValidationError("coordinate outside dimension");
                b(static_cast<Eigen::Index>(coords[j]), static_cast<Eigen::Index>(j)) = 1.0;
            }
            blocks.push_back({value, std::move(b)});
        }
        return SpectralContraction(dim, std::move(blocks));
    }

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<EigenBlock>& blocks() const noexcept { return blocks_; }

    std::size_t rank() const {
        std::size_t r = 0;
        for (const auto& b : blocks_) r += static_cast<std::size_t>(b.basis.cols());
        return r;
    }

    TruncatedOperator op() const {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
        for (const auto& b : blocks_) m += b.eigenvalue.value() * multiply(b.basis, b.basis.adjoint());
        return TruncatedOperator(std::move(m), Tail::Zero);
    }

    /// Coordinates of each eigenspace if every basis vector is a standard basis vector.
    std::optional<std::vector<std::vector<std::size_t>>> coordinate_form() const {
        std::vector<std::vector<std::size_t>> out;
        for (const auto& b : blocks_) {
            std::vector<std::size_t> coords;
            for (Eigen::Index j = 0; j < b.basis.cols(); ++j) {
                Eigen::Index hit = -1;
                for (Eigen::Index i = 0; i < b.basis.rows(); ++i) {
                    const Scalar v = b.basis(i, j);
                    if (v == Scalar(0.0, 0.0)) continue;
                    if (v != Scalar(1.0, 0.0) || hit >= 0) return std::nullopt;
                    hit = i;
                }
                if (hit < 0) return std::nullopt;
                coords.push_back(static_cast<std::size_t>(hit));
            }
            std::sort(coords.begin(), coords.end());
            out.push_back(std::move(coords));
        }
        return out;
    }

private:
    std::size_t dim_;
    std::vector<EigenBlock> blocks_;
};

/// Projection onto the range of h.
inline TruncatedOperator range_projection(const SpectralContraction& h) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(h.dim()), static_cast<Eigen::Index>(h.dim()));
    for (const auto& b : h.blocks()) m += multiply(b.basis, b.basis.adjoint());
    return TruncatedOperator(std::move(m), Tail::Zero);
}

/// Projection onto the 1-eigenspace of h.
inline TruncatedOperator one_eigenspace_projection(const SpectralContraction& h) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(h.dim()), static_cast<Eigen::Index>(h.dim()));
    for (const auto& b : h.blocks())
        if (b.eigenvalue == Rational{1, 1}) m += multiply(b.basis, b.basis.adjoint());
    return TruncatedOperator(std::move(m), Tail::Zero);
}

/// T is way above S when T acts as the identity on S: ||T S - S|| <= tol.
inline bool way_above(const TruncatedOperator& t, const TruncatedOperator& s, double tol = 0.0) {
    return operator_norm(t * s - s) <= tol;
}

inline bool way_above(const SpectralContraction& t, const SpectralContraction& s, double tol = 0.0) {
    return way_above(t.op(), s.op(), tol);
}

}  // namespace cqforce::linalg
