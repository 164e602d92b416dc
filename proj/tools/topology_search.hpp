#pragma once

// Exhaustive search over 8-node affordance layouts whose parameter count
// matches a target. Node 0 is the action, 1..3 object features, 4..7 effects.

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace affem::topology {

inline constexpr std::size_t kNodes = 8;
inline constexpr std::size_t kFeatures[] = {1, 2, 3};
inline constexpr std::size_t kEffects[] = {4, 5, 6, 7};

using ArcList = std::vector<std::pair<std::size_t, std::size_t>>;

struct Candidate {
    std::array<int, kNodes> cards{};
    ArcList arcs;
    std::size_t largest_cpt = 0;
    std::size_t max_in_degree = 0;
};

struct Stats {
    std::size_t dof = 0;
    std::size_t largest_cpt = 0;
    std::size_t max_in_degree = 0;
};

inline Stats measure(const std::array<int, kNodes>& cards, const ArcList& arcs) {
    Stats s;
    for (std::size_t i = 0; i < kNodes; ++i) {
        std::size_t rows = 1, parents = 0;
        for (const auto& [p, c] : arcs)
            if (c == i) {
                rows *= static_cast<std::size_t>(cards[p]);
                ++parents;
            }
        s.dof += rows * static_cast<std::size_t>(cards[i] - 1);
        s.largest_cpt = std::max(s.largest_cpt, rows * static_cast<std::size_t>(cards[i]));
        s.max_in_degree = std::max(s.max_in_degree, parents);
    }
    return s;
}

inline bool is_effect(std::size_t n) { return n >= 4; }
inline bool is_feature(std::size_t n) { return n >= 1 && n <= 3; }

inline std::size_t effect_to_effect_arcs(const ArcList& arcs) {
    return static_cast<std::size_t>(
        std::count_if(arcs.begin(), arcs.end(), [](const auto& a) { return is_effect(a.first) && is_effect(a.second); }));
}

inline std::size_t features_feeding_effects(const ArcList& arcs) {
    std::array<bool, kNodes> used{};
    for (const auto& [p, c] : arcs)
        if (is_feature(p) && is_effect(c)) used[p] = true;
    return static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
}

/// Every layout with the action feeding all effects, `arc_count` arcs in
/// total, in-degree at most `max_in_degree`, action cardinality 3, other
/// cardinalities in [2, 4] and exactly `target_dof` free parameters.
inline void enumerate(std::size_t target_dof, std::size_t arc_count, std::size_t max_in_degree,
                      const std::function<void(const Candidate&)>& visit) {
    ArcList forced;
    for (auto e : kEffects) forced.emplace_back(0, e);
    ArcList optional;
    for (auto f : kFeatures)
        for (auto e : kEffects) optional.emplace_back(f, e);
    for (auto a : kEffects)
        for (auto b : kEffects)
            if (a < b) optional.emplace_back(a, b);
    for (auto a : kFeatures)
        for (auto b : kFeatures)
            if (a < b) optional.emplace_back(a, b);

    const std::size_t extra = arc_count - forced.size();
    std::vector<bool> pick(optional.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(extra), true);
    Candidate cand;
    do {
        cand.arcs = forced;
        for (std::size_t j = 0; j < optional.size(); ++j)
            if (pick[j]) cand.arcs.push_back(optional[j]);
        std::array<std::size_t, kNodes> indeg{};
        for (const auto& a : cand.arcs) ++indeg[a.second];
        if (*std::max_element(indeg.begin(), indeg.end()) > max_in_degree) continue;

        std::array<std::array<std::size_t, kNodes>, kNodes> parents{};
        std::array<std::size_t, kNodes> fill{};
        for (const auto& [p, c] : cand.arcs) parents[c][fill[c]++] = p;

        cand.cards.fill(2);
        cand.cards[0] = 3;
        while (true) {
            std::size_t dof = 0, largest = 0;
            for (std::size_t i = 0; i < kNodes && dof <= target_dof; ++i) {
                std::size_t rows = 1;
                for (std::size_t j = 0; j < fill[i]; ++j) rows *= static_cast<std::size_t>(cand.cards[parents[i][j]]);
                dof += rows * static_cast<std::size_t>(cand.cards[i] - 1);
                largest = std::max(largest, rows * static_cast<std::size_t>(cand.cards[i]));
            }
            if (dof == target_dof) {
                cand.largest_cpt = largest;
                cand.max_in_degree = *std::max_element(fill.begin(), fill.end());
                visit(cand);
            }
            std::size_t i = 1;
            while (i < kNodes && cand.cards[i] == 4) cand.cards[i++] = 2;
            if (i == kNodes) break;
            ++cand.cards[i];
        }
    } while (std::prev_permutation(pick.begin(), pick.end()));
}

/// Preference used to freeze the benchmark layout: smallest largest CPT,
/// then no effect-to-effect arcs, then every object feature driving an effect.
inline bool preferred(const Candidate& c, std::size_t smallest_largest_cpt) {
    return c.largest_cpt == smallest_largest_cpt && effect_to_effect_arcs(c.arcs) == 0 &&
           features_feeding_effects(c.arcs) == 3;
}

}  // namespace affem::topology
