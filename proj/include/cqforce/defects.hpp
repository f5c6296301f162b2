#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "cqforce/linalg/operator.hpp"
#include "cqforce/relations.hpp"

namespace cqforce {

struct AdditiveDefect {
    rel::LinearRelation relation;
    double norm;
};
struct AdjointDefect {
    rel::AdjointRelation relation;
    double norm;
};
struct ProductDefect {
    rel::ProductRelation relation;
    double norm;
};

/// Defect norms of a map on a window W: ||(psi(f) - l psi(a) - m psi(b))W||,
/// ||(psi(a*) - psi(a)*)W|| and ||(psi(ab) - psi(a)psi(b))W||.
struct DefectReport {
    std::vector<AdditiveDefect> additive;
    std::vector<AdjointDefect> adjoint;
    std::vector<ProductDefect> product;

    double max_additive() const {
        double m = 0.0;
        for (const auto& d : additive) m = std::max(m, d.norm);
        return m;
    }
    double max_adjoint() const {
        double m = 0.0;
        for (const auto& d : adjoint) m = std::max(m, d.norm);
        return m;
    }
    double max_product() const {
        double m = 0.0;
        for (const auto& d : product) m = std::max(m, d.norm);
        return m;
    }
    double max_all() const { return std::max({max_additive(), max_adjoint(), max_product()}); }
};

using PsiLookup = std::function<const linalg::TruncatedOperator&(pres::Handle)>;

inline DefectReport measure_defects(const rel::Relations& rels, const PsiLookup& psi, const linalg::TruncatedOperator& window) {
    using linalg::Matrix;
    using linalg::multiply;
    std::size_t n = window.dim();
    auto widen = [&](pres::Handle h) { n = std::max(n, psi(h).dim()); };
    for (const auto& r : rels.linear) widen(r.f), widen(r.a), widen(r.b);
    for (const auto& r : rels.adjoint) widen(r.a), widen(r.a_star);
    for (const auto& r : rels.product) widen(r.a), widen(r.b), widen(r.ab);
    const Matrix w = window.padded(n);
    auto at = [&](pres::Handle h) { return psi(h).padded(n); };

    DefectReport out;
    for (const auto& r : rels.linear) {
        const Matrix d = at(r.f) - r.lambda * at(r.a) - r.mu * at(r.b);
        out.additive.push_back({r, linalg::spectral_norm(multiply(d, w))});
    }
    for (const auto& r : rels.adjoint) {
        const Matrix d = at(r.a_star) - at(r.a).adjoint();
        out.adjoint.push_back({r, linalg::spectral_norm(multiply(d, w))});
    }
    for (const auto& r : rels.product) {
        const Matrix d = multiply(at(r.ab), w) - multiply(at(r.a), multiply(at(r.b), w));
        out.product.push_back({r, linalg::spectral_norm(d)});
    }
    return out;
}

}  // namespace cqforce
