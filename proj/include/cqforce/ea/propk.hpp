#pragma once

#include <iomanip>
#include <sstream>

#include "cqforce/combinatorics.hpp"
#include "cqforce/ea/construct.hpp"

namespace cqforce::ea {

struct PropKResult {
    std::vector<std::size_t> bucket;   // uniformized class, indices into the input
    std::vector<Handle> root;          // root of the Delta-system on F sets
    std::vector<std::size_t> members;  // pairwise compatible subfamily
    std::vector<std::size_t> dropped;  // bucket members lost while re-basing or amalgamating
    std::map<std::pair<std::size_t, std::size_t>, EACondition> amalgams;  // keyed by input indices, first < second
};

namespace detail {

/// Exact textual key of (eps, h, R, k).
inline std::string fingerprint(const EACondition& p) {
    std::ostringstream s;
    s << std::hexfloat << p.eps << '|' << p.R.n << '|';
    auto spectral = [&](const SpectralContraction& c) {
        const auto form = c.coordinate_form();
        if (!form) throw UnsupportedPresentation("fingerprint requires coordinate-aligned spectral forms");
        for (std::size_t i = 0; i < c.blocks().size(); ++i) {
            s << c.blocks()[i].eigenvalue.num << '/' << c.blocks()[i].eigenvalue.den << ':';
            for (auto x : (*form)[i]) s << x << ',';
            s << ';';
        }
        s << '|';
    };
    spectral(p.h);
    if (p.promise) spectral(p.promise->k);
    return s.str();
}

}  // namespace detail

/// Uniformize on (eps, h, R, k), extract a Delta-system of F sets, re-base the
/// promises on one representation and amalgamate every pair.
inline PropKResult ea_propk_pipeline(const pres::HandleTable& t, const std::vector<EACondition>& conditions,
                                     std::size_t target, const BuildParams& params = {}) {
    if (conditions.empty()) throw ValidationError("propk needs at least one condition");
    for (const auto& c : conditions)
        if (!c.promise) throw ValidationError("every condition needs a promise");
    PropKResult out;
    out.bucket = comb::uniformize(conditions, [](const EACondition& c) { return detail::fingerprint(c); });

    std::vector<std::vector<Handle>> family;
    for (auto i : out.bucket) family.push_back(conditions[i].F);
    const auto ds = comb::delta_system_extract(family, std::min(target, family.size()));
    out.root = ds.root;

    // Common representation: the promise of the first member, kept only where it is still a promise.
    std::vector<EACondition> rebased;
    std::vector<std::size_t> index;
    const LazyRepresentation& common = conditions[out.bucket[ds.members.front()]].promise->phi;
    for (auto m : ds.members) {
        const std::size_t i = out.bucket[m];
        EACondition c = conditions[i];
        c.promise->phi = common;
        if (promise_check(t, c, params.tol).holds()) {
            rebased.push_back(std::move(c));
            index.push_back(i);
        } else {
            out.dropped.push_back(i);
        }
    }

    std::vector<std::size_t> kept;  // positions in rebased
    for (std::size_t j = 0; j < rebased.size() && out.members.size() < target; ++j) {
        std::map<std::pair<std::size_t, std::size_t>, EACondition> found;
        bool ok = true;
        for (std::size_t i : kept) {
            try {
                found.emplace(std::make_pair(index[i], index[j]), ea_amalgamate(t, rebased[i], rebased[j], params));
            } catch (const Error&) {
                ok = false;
                break;
            }
        }
        if (ok) {
            try {
                found.emplace(std::make_pair(index[j], index[j]), ea_amalgamate(t, rebased[j], rebased[j], params));
            } catch (const Error&) {
                ok = false;
            }
        }
        if (!ok) {
            out.dropped.push_back(index[j]);
            continue;
        }
        kept.push_back(j);
        out.members.push_back(index[j]);
        out.amalgams.merge(found);
    }
    return out;
}

}  // namespace cqforce::ea
