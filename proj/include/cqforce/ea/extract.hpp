#pragma once

#include "cqforce/ea/condition.hpp"

namespace cqforce::ea {

/// Refuses chains whose h-sequence is not increasing in the way-above order.
inline void require_approximate_unit(const std::vector<EACondition>& chain) {
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
        const std::size_t n = std::max(chain[j].dim(), chain[j + 1].dim());
        if (!linalg::way_above(chain[j + 1].h.op().resized(n), chain[j].h.op().resized(n), 0.0))
            throw OrderError("h does not increase at link " + std::to_string(j), j);
    }
}

/// psi_{p_stage}(a), padded to the final dimension of the chain.
inline TruncatedOperator ea_extract(const std::vector<EACondition>& chain, Handle a, std::size_t stage) {
    if (stage >= chain.size()) throw DomainError("stage beyond chain");
    require_approximate_unit(chain);
    if (!chain[stage].has(a)) throw DomainError("handle " + std::to_string(a) + " has not entered the chain by this stage");
    return chain[stage].at(a);
}

struct EAWindowRecord {
    std::size_t stage = 0;  // window h_last- - h_stage-
    double eps = 0.0;
    double max_additive = 0.0;
    double max_adjoint = 0.0;
    double max_product = 0.0;
    bool stabilized = false;  // psi_last(a) h_stage+ == psi_stage(a) for every a
};

struct EAExtraction {
    std::vector<EAWindowRecord> windows;
    bool unital = false;          // psi_last(1) == h_last+
    std::size_t algebra_rank = 0;  // rank of F_last in the algebra
    std::size_t image_rank = 0;    // rank of its image under psi_last
    bool injective() const { return image_rank >= algebra_rank; }
};

/// Windowed defects of the last stage against every earlier stage, plus
/// stabilization, unitality and the injectivity rank.
inline EAExtraction ea_extraction_report(const pres::HandleTable& t, const std::vector<EACondition>& chain) {
    require_approximate_unit(chain);
    EAExtraction out;
    if (chain.empty()) return out;
    const auto& last = chain.back();
    std::size_t n = 0;
    for (const auto& c : chain) n = std::max(n, c.dim());
    const auto hl_minus = linalg::one_eigenspace_projection(last.h).resized(n);
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
        const auto& pj = chain[j];
        EAWindowRecord rec;
        rec.stage = j;
        rec.eps = pj.eps;
        const auto window = hl_minus - linalg::one_eigenspace_projection(pj.h).resized(n);
        const auto d = measure_defects(rel::relations_within(t, pj.F),
                                       [&](Handle h) -> const TruncatedOperator& { return last.at(h); }, window);
        rec.max_additive = d.max_additive();
        rec.max_adjoint = d.max_adjoint();
        rec.max_product = d.max_product();
        const auto hp = linalg::range_projection(pj.h).resized(n);
        rec.stabilized = true;
        for (Handle a : pj.F)
            if (!identical(last.at(a).resized(n) * hp, pj.at(a).resized(n))) rec.stabilized = false;
        out.windows.push_back(rec);
    }
    out.unital = last.has(0) && identical(last.at(0).resized(n), linalg::range_projection(last.h).resized(n));

    const auto& A = t.algebra();
    const auto ni = static_cast<Eigen::Index>(n);
    Matrix coords(static_cast<Eigen::Index>(A.dimension()), static_cast<Eigen::Index>(last.F.size()));
    Matrix images(ni * ni, static_cast<Eigen::Index>(last.F.size()));
    for (std::size_t i = 0; i < last.F.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        coords.col(col) = A.coordinates(t[last.F[i]]);
        const Matrix v = last.at(last.F[i]).padded(n);
        images.col(col) = Eigen::Map<const linalg::Vector>(v.data(), ni * ni);
    }
    out.algebra_rank = static_cast<std::size_t>(linalg::orthonormal_span(coords).cols());
    out.image_rank = static_cast<std::size_t>(linalg::orthonormal_span(images).cols());
    return out;
}

}  // namespace cqforce::ea
