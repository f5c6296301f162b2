#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <type_traits>
#include <vector>

namespace cqforce::comb {

/// A subfamily whose pairwise intersections all equal root.
template <class Id>
struct DeltaSystem {
    std::vector<Id> root;
    std::vector<std::size_t> members;  // indices into the input family, ascending
};

namespace detail {

template <class Id>
std::vector<Id> normalized(std::vector<Id> s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

template <class Id>
std::vector<Id> intersect(const std::vector<Id>& a, const std::vector<Id>& b) {
    std::vector<Id> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

template <class Id>
bool is_delta_system(const std::vector<std::vector<Id>>& fam, const std::vector<std::size_t>& members,
                     std::vector<Id>* root) {
    if (members.size() < 2) {
        if (root) *root = members.empty() ? std::vector<Id>{} : fam[members[0]];
        return true;
    }
    const auto r = intersect(fam[members[0]], fam[members[1]]);
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
            if (intersect(fam[members[i]], fam[members[j]]) != r) return false;
    if (root) *root = r;
    return true;
}

}  // namespace detail

/// Largest Delta-subsystem found: exhaustive for at most 12 sets, otherwise a
/// kernel-first greedy pass over every candidate root (empty set and pairwise
/// intersections). Stops at the first subfamily of size target.
template <class Id>
DeltaSystem<Id> delta_system_extract(const std::vector<std::vector<Id>>& family_in, std::size_t target) {
    std::vector<std::vector<Id>> fam;
    fam.reserve(family_in.size());
    for (const auto& s : family_in) fam.push_back(detail::normalized(s));
    const std::size_t n = fam.size();
    DeltaSystem<Id> best;
    if (n == 0) return best;
    best.members = {0};
    best.root = fam[0];

    if (n <= 12) {
        std::size_t best_mask = 1;
        std::size_t best_size = 1;
        for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
            const auto size = static_cast<std::size_t>(__builtin_popcountll(mask));
            if (size <= best_size) continue;
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (std::size_t{1} << i)) members.push_back(i);
            if (detail::is_delta_system<Id>(fam, members, nullptr)) {
                best_size = size;
                best_mask = mask;
            }
        }
        best.members.clear();
        for (std::size_t i = 0; i < n; ++i)
            if (best_mask & (std::size_t{1} << i)) best.members.push_back(i);
        detail::is_delta_system(fam, best.members, &best.root);
        return best;
    }

    std::set<std::vector<Id>> roots;
    roots.insert({});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) roots.insert(detail::intersect(fam[i], fam[j]));
    for (const auto& r : roots) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::includes(fam[i].begin(), fam[i].end(), r.begin(), r.end())) continue;
            bool ok = true;
            for (auto m : members)
                if (detail::intersect(fam[i], fam[m]) != r) {
                    ok = false;
                    break;
                }
            if (ok) members.push_back(i);
        }
        if (members.size() > best.members.size()) {
            best.members = members;
            best.root = members.size() == 1 ? fam[members[0]] : r;
            if (best.members.size() >= target) break;
        }
    }
    return best;
}

/// Indices of the largest class of items sharing a fingerprint. Ties go to the
/// class whose first member appears earliest.
template <class T, class Fingerprint>
std::vector<std::size_t> uniformize(const std::vector<T>& items, Fingerprint fingerprint) {
    using Key = std::decay_t<std::invoke_result_t<Fingerprint, const T&>>;
    std::map<Key, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < items.size(); ++i) classes[fingerprint(items[i])].push_back(i);
    const std::vector<std::size_t>* best = nullptr;
    for (const auto& [key, members] : classes) {
        if (!best || members.size() > best->size() ||
            (members.size() == best->size() && members.front() < best->front()))
            best = &members;
    }
    return best ? *best : std::vector<std::size_t>{};
}

}  // namespace cqforce::comb
