#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cqforce/presentations.hpp"

namespace cqforce::rel {

using pres::Handle;
using linalg::Scalar;

/// f = lambda a + mu b with f, a, b in the handle set.
struct LinearRelation {
    Handle f, a, b;
    Scalar lambda, mu;
};
/// a* = s with a, s in the handle set.
struct AdjointRelation {
    Handle a, a_star;
};
/// a b = c with a, b, c in the handle set.
struct ProductRelation {
    Handle a, b, ab;
};

struct Relations {
    std::vector<LinearRelation> linear;
    std::vector<AdjointRelation> adjoint;
    std::vector<ProductRelation> product;
};

/// Every exact relation among the handles of F.
///
/// Linear relations come from least squares in the coordinate space for each
/// triple (f, a, b) with a != 0; only solutions with residual below 1e-10 are
/// kept. When a and b are dependent the single solution with mu = 0 is recorded.
inline Relations relations_within(const pres::HandleTable& t, const std::vector<Handle>& F) {
    const auto& A = t.algebra();
    Relations r;
    std::vector<linalg::Vector> coords;
    for (Handle h : F) coords.push_back(A.coordinates(t[h]));
    for (std::size_t ia = 0; ia < F.size(); ++ia) {
        const auto& va = coords[ia];
        const double na = va.squaredNorm();
        if (na == 0.0) continue;
        for (std::size_t ib = 0; ib < F.size(); ++ib) {
            const auto& vb = coords[ib];
            linalg::Matrix m(va.size(), 2);
            m.col(0) = va;
            m.col(1) = vb;
            const Scalar cross = va.dot(vb);
            const double gram_det = na * vb.squaredNorm() - std::norm(cross);
            const bool independent = gram_det > 1e-20 * std::max(1.0, na * vb.squaredNorm());
            Eigen::CompleteOrthogonalDecomposition<linalg::Matrix> cod;
            if (independent) cod.compute(m);
            for (std::size_t iff = 0; iff < F.size(); ++iff) {
                const auto& vf = coords[iff];
                Scalar lambda, mu;
                if (independent) {
                    const linalg::Vector x = cod.solve(vf);
                    lambda = x(0);
                    mu = x(1);
                } else {
                    lambda = va.dot(vf) / na;
                    mu = Scalar(0.0, 0.0);
                }
                const double residual = (vf - lambda * va - mu * vb).norm();
                if (residual < 1e-10) r.linear.push_back({F[iff], F[ia], F[ib], lambda, mu});
            }
        }
    }
    auto index_of = [&](const pres::Element& x) -> std::optional<Handle> {
        for (Handle h : F)
            if (A.approx_equal(t[h], x)) return h;
        return std::nullopt;
    };
    for (Handle a : F) {
        if (auto s = index_of(A.star(t[a]))) r.adjoint.push_back({a, *s});
        for (Handle b : F)
            if (auto c = index_of(A.mul(t[a], t[b]))) r.product.push_back({a, b, *c});
    }
    return r;
}

/// L(F): largest |lambda| over the linear relations within F (0 if none).
inline double linear_constant(const Relations& r) {
    double L = 0.0;
    for (const auto& l : r.linear) L = std::max(L, std::abs(l.lambda));
    return L;
}

}  // namespace cqforce::rel
