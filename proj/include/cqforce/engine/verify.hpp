#pragma once

// Recomputes every check from stored conditions. Only checkers and extraction
// are included here, never constructors.

#include "cqforce/ea/condition.hpp"
#include "cqforce/ea/extract.hpp"
#include "cqforce/engine/format.hpp"
#include "cqforce/pb/condition.hpp"
#include "cqforce/pb/extract.hpp"
#include "cqforce/qd/condition.hpp"
#include "cqforce/qd/extract.hpp"

namespace cqforce::engine {

struct Diagnostic {
    std::string scope;  // "stage 3", "pair 4<2", "chain", ...
    std::string check;
    bool pass = true;
    std::string detail;
};

struct Verification {
    std::vector<Diagnostic> diagnostics;
    json records = json::object();

    bool pass() const {
        for (const auto& d : diagnostics)
            if (!d.pass) return false;
        return true;
    }

    void add(std::string scope, std::string check, bool pass, std::string detail = {}) {
        diagnostics.push_back({std::move(scope), std::move(check), pass, std::move(detail)});
    }

    void add(std::string scope, std::string check, const CheckReport& r) {
        std::string detail;
        for (const auto& v : r.violations) detail += (detail.empty() ? "" : "; ") + v.clause + ": " + v.detail;
        add(std::move(scope), std::move(check), r.holds(), std::move(detail));
    }

    /// One line per diagnostic followed by the verdict.
    std::string stream(bool machine) const {
        std::string out;
        for (const auto& d : diagnostics) {
            if (machine) {
                out += json{{"scope", d.scope}, {"check", d.check}, {"pass", d.pass}, {"detail", d.detail}}.dump() + "\n";
            } else {
                out += d.scope + " " + d.check + " " + (d.pass ? "PASS" : "FAIL");
                if (!d.detail.empty()) out += " " + d.detail;
                out += "\n";
            }
        }
        if (machine)
            out += json{{"verdict", pass() ? "PASS" : "FAIL"}}.dump() + "\n";
        else
            out += std::string("verdict ") + (pass() ? "PASS" : "FAIL") + "\n";
        return out;
    }
};

namespace detail {

inline std::string stage(std::size_t i) { return "stage " + std::to_string(i); }
inline std::string pair(std::size_t j, std::size_t i) { return "pair " + std::to_string(j) + "<" + std::to_string(i); }

}  // namespace detail

/// Links, extraction soundness and coverage of the target algebra.
inline Verification verify_pb(const boolean::FiniteBooleanAlgebra& target, const std::vector<pb::PBCondition>& chain,
                              std::size_t horizon) {
    Verification v;
    if (chain.empty()) {
        v.add("chain", "nonempty", false, "no conditions");
        return v;
    }
    bool links = true;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        try {
            chain[i].validate();
            v.add(detail::stage(i), "condition", true);
        } catch (const Error& e) {
            v.add(detail::stage(i), "condition", false, e.what());
            links = false;
        }
        if (i + 1 < chain.size()) {
            const auto r = pb::pb_order_check(chain[i + 1], chain[i]);
            v.add(detail::pair(i + 1, i), "order", r);
            links = links && r.holds();
        }
    }
    v.add("chain", "coverage", chain.back().algebra.includes(target),
          chain.back().algebra.includes(target) ? "" : "final algebra does not contain the target");
    if (!links) return v;

    const auto x = pb::pb_extract_embedding(chain, horizon);
    std::int64_t complement = 0, meet = 0, join = 0, order = 0;
    std::size_t min_dis = std::numeric_limits<std::size_t>::max();
    auto excess = [&](std::size_t value, std::size_t stage) {
        return static_cast<std::int64_t>(value) - static_cast<std::int64_t>(x.lengths[stage]);
    };
    for (const auto& e : x.elements) complement = std::max(complement, excess(e.complement_stage, e.entry_stage));
    for (const auto& p : x.pairs) {
        meet = std::max(meet, excess(p.meet_stage, p.joint_stage));
        join = std::max(join, excess(p.join_stage, p.joint_stage));
        if (p.joint_stage + 1 < x.lengths.size()) min_dis = std::min(min_dis, p.min_disagreement);
    }
    for (const auto& o : x.order)
        order = std::max(order, excess(o.stage, std::max(x.entry_of(o.below), x.entry_of(o.above))));
    if (min_dis == std::numeric_limits<std::size_t>::max()) min_dis = 0;
    v.records = json{{"horizon", x.horizon},
                     {"defined", x.defined},
                     {"lengths", x.lengths},
                     {"elements", x.elements.size()},
                     {"pairs", x.pairs.size()},
                     {"max_complement_excess", complement},
                     {"max_meet_excess", meet},
                     {"max_join_excess", join},
                     {"max_order_excess", order},
                     {"min_disagreement", min_dis}};
    v.add("chain", "extraction", x.sound(),
          "defined " + std::to_string(x.defined) + ", excess complement/meet/join/order " + std::to_string(complement) +
              "/" + std::to_string(meet) + "/" + std::to_string(join) + "/" + std::to_string(order) +
              ", min disagreement " + std::to_string(min_dis));
    return v;
}

/// Every condition, every ordered pair, and windowed defects of the final stage.
inline Verification verify_qd(const pres::HandleTable& t, const std::vector<qd::QDCondition>& chain,
                              std::size_t truncation, const Tolerances& tol = {}) {
    Verification v;
    if (chain.empty()) {
        v.add("chain", "nonempty", false, "no conditions");
        return v;
    }
    for (std::size_t i = 0; i < chain.size(); ++i) {
        v.add(detail::stage(i), "condition", qd::qd_condition_check(t, chain[i]));
        v.add(detail::stage(i), "truncation", chain[i].n <= truncation,
              chain[i].n <= truncation ? "" : "n = " + std::to_string(chain[i].n) + " exceeds N");
    }
    for (std::size_t i = 0; i < chain.size(); ++i)
        for (std::size_t j = i + 1; j < chain.size(); ++j) v.add(detail::pair(j, i), "order", qd::qd_order_check(t, chain[j], chain[i], tol));
    json windows = json::array();
    for (const auto& w : qd::qd_window_records(t, chain)) {
        windows.push_back(json{{"stage", w.stage},
                               {"eps", dyadic(w.eps)},
                               {"max_additive", dyadic(w.max_additive)},
                               {"max_adjoint", dyadic(w.max_adjoint)},
                               {"max_product", dyadic(w.max_product)},
                               {"min_norm_slack", dyadic(w.min_norm_slack)}});
        const bool ok = w.max_additive < w.eps && w.max_adjoint < w.eps && w.max_product < w.eps && w.min_norm_slack > 0.0;
        v.add("window " + std::to_string(w.stage), "defects", ok,
              "max defect " + qd::fmt(std::max({w.max_additive, w.max_adjoint, w.max_product})) + " vs eps " + qd::fmt(w.eps) +
                  ", norm slack " + qd::fmt(w.min_norm_slack));
    }
    v.records = json{{"windows", windows}, {"stages", chain.size()}};
    return v;
}

inline Verification verify_ea(const pres::HandleTable& t, const std::vector<ea::EACondition>& chain,
                              std::size_t truncation, const Tolerances& tol = {}) {
    Verification v;
    if (chain.empty()) {
        v.add("chain", "nonempty", false, "no conditions");
        return v;
    }
    for (std::size_t i = 0; i < chain.size(); ++i) {
        v.add(detail::stage(i), "condition", ea::ea_condition_check(t, chain[i]));
        v.add(detail::stage(i), "promise", ea::promise_check(t, chain[i], tol));
        const std::size_t n = chain[i].dim();
        v.add(detail::stage(i), "truncation", n <= truncation, n <= truncation ? "" : "dimension " + std::to_string(n) + " exceeds N");
    }
    for (std::size_t i = 0; i < chain.size(); ++i)
        for (std::size_t j = i + 1; j < chain.size(); ++j) v.add(detail::pair(j, i), "order", ea::ea_order_check(t, chain[j], chain[i], tol));
    if (!v.pass()) return v;

    const auto x = ea::ea_extraction_report(t, chain);
    json windows = json::array();
    for (const auto& w : x.windows) {
        windows.push_back(json{{"stage", w.stage},
                               {"eps", dyadic(w.eps)},
                               {"max_additive", dyadic(w.max_additive)},
                               {"max_adjoint", dyadic(w.max_adjoint)},
                               {"max_product", dyadic(w.max_product)},
                               {"stabilized", w.stabilized}});
        const bool ok = w.stabilized && w.max_additive < w.eps && w.max_adjoint < w.eps && w.max_product < w.eps;
        v.add("window " + std::to_string(w.stage), "defects", ok,
              "max defect " + ea::detail::fmt(std::max({w.max_additive, w.max_adjoint, w.max_product})) + " vs eps " +
                  ea::detail::fmt(w.eps) + (w.stabilized ? "" : ", not stabilized"));
    }
    v.add("chain", "unital", x.unital);
    v.add("chain", "injective", x.injective(),
          "rank " + std::to_string(x.image_rank) + " of " + std::to_string(x.algebra_rank));
    v.records = json{{"windows", windows},
                     {"unital", x.unital},
                     {"algebra_rank", x.algebra_rank},
                     {"image_rank", x.image_rank},
                     {"stages", chain.size()}};
    return v;
}

}  // namespace cqforce::engine
