#pragma once

#include <vector>

#include "cqforce/qd/condition.hpp"

namespace cqforce::qd {

/// psi_{p_stage}(a): the stage truncation of the strong limit.
inline TruncatedOperator qd_extract(const std::vector<QDCondition>& chain, Handle a, std::size_t stage) {
    if (stage >= chain.size()) throw DomainError("stage beyond chain");
    if (!chain[stage].has(a)) throw DomainError("handle " + std::to_string(a) + " has not entered the chain by this stage");
    return chain[stage].at(a);
}

struct QDWindowRecord {
    std::size_t stage = 0;  // window (n_stage, n_{stage+1})
    double eps = 0.0;       // eps of the stage
    double max_additive = 0.0;
    double max_adjoint = 0.0;
    double max_product = 0.0;
    double min_norm_slack = 0.0;  // min over a of ||Psi(a) window|| - (||a|| - eps)
};

/// Defects of the final stage on every window, measured against the relations
/// living in F of the window's stage.
inline std::vector<QDWindowRecord> qd_window_records(const pres::HandleTable& t, const std::vector<QDCondition>& chain) {
    std::vector<QDWindowRecord> out;
    if (chain.empty()) return out;
    const auto& last = chain.back();
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
        const auto& pj = chain[j];
        QDWindowRecord rec;
        rec.stage = j;
        rec.eps = pj.eps;
        const auto d = qd_delta(last, pj.n, chain[j + 1].n, rel::relations_within(t, pj.F));
        rec.max_additive = d.max_additive();
        rec.max_adjoint = d.max_adjoint();
        rec.max_product = d.max_product();
        std::vector<std::size_t> coords;
        for (std::size_t i = pj.n; i < chain[j + 1].n; ++i) coords.push_back(i);
        const auto w = TruncatedOperator::coordinate_projection(last.n, coords);
        rec.min_norm_slack = 1e300;
        for (Handle h : pj.F) {
            const double v = linalg::operator_norm(last.at(h) * w) - (t.algebra().norm(t[h]) - pj.eps);
            rec.min_norm_slack = std::min(rec.min_norm_slack, v);
        }
        out.push_back(rec);
    }
    return out;
}

}  // namespace cqforce::qd
