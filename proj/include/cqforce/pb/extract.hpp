#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "cqforce/pb/condition.hpp"

namespace cqforce::pb {

struct PairRecord {
    Mask b = 0;
    Mask c = 0;
    std::size_t joint_stage = 0;       // first chain index containing both
    std::size_t meet_stage = 0;        // n0: meet holds on [n0, defined)
    std::size_t join_stage = 0;
    std::size_t min_disagreement = 0;  // over appended segments after joint entry
};

struct ElementRecord {
    Mask b = 0;
    std::size_t entry_stage = 0;
    std::size_t complement_stage = 0;
};

struct OrderRecord {
    Mask below = 0;
    Mask above = 0;
    std::size_t stage = 0;  // inclusion holds on [stage, defined)
};

struct PBExtraction {
    std::size_t horizon = 0;
    std::size_t defined = 0;  // Psi is determined on [0, defined)
    std::vector<std::size_t> lengths;  // n_{p_j}
    std::map<Mask, Bits> psi;          // Psi(b) restricted to [0, defined)
    std::vector<ElementRecord> elements;
    std::vector<PairRecord> pairs;
    std::vector<OrderRecord> order;

    /// Every operation holds beyond the length at the joint entry stage, and
    /// distinct elements disagree in every segment appended after it.
    bool sound() const {
        for (const auto& e : elements)
            if (e.complement_stage > lengths[e.entry_stage]) return false;
        for (const auto& p : pairs) {
            if (p.meet_stage > lengths[p.joint_stage] || p.join_stage > lengths[p.joint_stage]) return false;
            if (p.joint_stage + 1 < lengths.size() && p.min_disagreement < 1) return false;
        }
        for (const auto& o : order)
            if (o.stage > lengths[std::max(entry_of(o.below), entry_of(o.above))]) return false;
        return true;
    }
    std::size_t entry_of(Mask b) const {
        for (const auto& e : elements)
            if (e.b == b) return e.entry_stage;
        throw DomainError("element never enters the chain");
    }
};

/// Reads the generic map off a decreasing chain. Throws OrderError at the first
/// link that fails pb_order_check.
inline PBExtraction pb_extract_embedding(const std::vector<PBCondition>& chain, std::size_t horizon) {
    if (chain.empty()) throw ValidationError("empty chain");
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        const auto rep = pb_order_check(chain[i + 1], chain[i]);
        if (!rep.holds())
            throw OrderError("chain link " + std::to_string(i) + " -> " + std::to_string(i + 1) +
                                 " fails: " + rep.violations.front().clause,
                             i);
    }
    PBExtraction x;
    x.horizon = horizon;
    x.defined = std::min(horizon, chain.back().n);
    for (const auto& c : chain) x.lengths.push_back(c.n);

    const auto& last = chain.back();
    const auto elems = last.algebra.elements();
    std::map<Mask, std::size_t> entry;
    for (Mask b : elems) {
        std::size_t s = 0;
        while (!chain[s].algebra.contains(b)) ++s;
        entry[b] = s;
        x.psi.emplace(b, last.at(b).resized(x.defined));
    }
    const Bits full = ~Bits(x.defined);
    for (Mask b : elems) {
        ElementRecord e;
        e.b = b;
        e.entry_stage = entry[b];
        e.complement_stage = (x.psi.at(last.algebra.complement(b)) ^ (full ^ x.psi.at(b))).last_set_end();
        x.elements.push_back(e);
    }
    for (std::size_t i = 0; i < elems.size(); ++i) {
        for (std::size_t j = i + 1; j < elems.size(); ++j) {
            const Mask b = elems[i], c = elems[j];
            const Bits& pb = x.psi.at(b);
            const Bits& pc = x.psi.at(c);
            PairRecord r;
            r.b = b;
            r.c = c;
            r.joint_stage = std::max(entry[b], entry[c]);
            r.meet_stage = (x.psi.at(b & c) ^ (pb & pc)).last_set_end();
            r.join_stage = (x.psi.at(b | c) ^ (pb | pc)).last_set_end();
            const Bits diff = pb ^ pc;
            r.min_disagreement = std::numeric_limits<std::size_t>::max();
            for (std::size_t s = r.joint_stage; s + 1 < chain.size(); ++s) {
                const std::size_t lo = chain[s].n, hi = std::min(chain[s + 1].n, x.defined);
                if (lo >= hi) break;
                r.min_disagreement = std::min(r.min_disagreement, diff.popcount_range(lo, hi));
            }
            if (r.min_disagreement == std::numeric_limits<std::size_t>::max()) r.min_disagreement = 0;
            x.pairs.push_back(r);
            if ((b & c) == b || (b & c) == c) {
                OrderRecord o;
                o.below = (b & c) == b ? b : c;
                o.above = o.below == b ? c : b;
                o.stage = (x.psi.at(o.below) & ~x.psi.at(o.above)).last_set_end();
                x.order.push_back(o);
            }
        }
    }
    return x;
}

}  // namespace cqforce::pb
