#pragma once

// Test-only helpers: random instance generators and brute-force oracles that
// work directly on NetworkSpec/Cpt data, independent of the library's
// inference code paths.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "affem/network.hpp"

namespace affem::testing {

/// Random DAG with at most `max_nodes` nodes, cardinalities in [2, max_card],
/// at most `max_parents` parents per node and at most 2^max_joint_bits joint
/// configurations. Node labels are shuffled so topological order differs
/// from index order.
inline NetworkSpec random_spec(std::mt19937_64& g, std::size_t max_nodes = 8, int max_card = 4,
                               double max_joint_bits = 16.0, std::size_t max_parents = 3, double arc_prob = 0.4) {
    std::uniform_int_distribution<std::size_t> count(1, max_nodes);
    std::uniform_int_distribution<int> card(2, max_card);
    std::bernoulli_distribution arc(arc_prob);
    const std::size_t n = count(g);
    NetworkSpec spec;
    std::vector<int> cards(n);
    for (auto& c : cards) c = card(g);
    auto bits = [&] {
        double b = 0;
        for (int c : cards) b += std::log2(c);
        return b;
    };
    while (bits() > max_joint_bits + 1e-12) {
        auto it = std::max_element(cards.begin(), cards.end());
        --*it;
    }
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), 0);
    std::shuffle(label.begin(), label.end(), g);
    for (std::size_t i = 0; i < n; ++i) spec.nodes.push_back({"N" + std::to_string(i), cards[i]});
    // arcs follow the hidden order label[0] < label[1] < ...
    std::vector<std::size_t> parents(n, 0);
    for (std::size_t b = 1; b < n; ++b)
        for (std::size_t a = 0; a < b; ++a)
            if (parents[label[b]] < max_parents && arc(g)) {
                spec.arcs.push_back({spec.nodes[label[a]].name, spec.nodes[label[b]].name});
                ++parents[label[b]];
            }
    std::shuffle(spec.arcs.begin(), spec.arcs.end(), g);
    return spec;
}

/// Parent index lists in arc order, computed from the raw spec.
inline std::vector<std::vector<std::size_t>> oracle_parents(const NetworkSpec& spec) {
    std::vector<std::vector<std::size_t>> parents(spec.nodes.size());
    auto find = [&](const std::string& name) {
        for (std::size_t i = 0; i < spec.nodes.size(); ++i)
            if (spec.nodes[i].name == name) return i;
        return spec.nodes.size();
    };
    for (const auto& a : spec.arcs) parents[find(a.child)].push_back(find(a.parent));
    return parents;
}

/// Calls fn(values) for every joint configuration (first node fastest).
template <class Fn>
void oracle_enumerate(const NetworkSpec& spec, Fn&& fn) {
    const std::size_t n = spec.nodes.size();
    std::size_t total = 1;
    for (const auto& node : spec.nodes) total *= static_cast<std::size_t>(node.cardinality);
    std::vector<int> values(n);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t rest = code;
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = static_cast<int>(rest % static_cast<std::size_t>(spec.nodes[i].cardinality));
            rest /= static_cast<std::size_t>(spec.nodes[i].cardinality);
        }
        fn(static_cast<const std::vector<int>&>(values));
    }
}

inline std::size_t oracle_row(const NetworkSpec& spec, const std::vector<std::size_t>& parents,
                              const std::vector<int>& values) {
    std::size_t row = 0;
    for (auto p : parents) row = row * static_cast<std::size_t>(spec.nodes[p].cardinality) + values[p];
    return row;
}

/// Π_i θ_i(values) straight from the tables.
inline double oracle_joint(const NetworkSpec& spec, const std::vector<Cpt>& cpts, const std::vector<int>& values) {
    const auto parents = oracle_parents(spec);
    double p = 1.0;
    for (std::size_t i = 0; i < spec.nodes.size(); ++i)
        p *= cpts[i].table[oracle_row(spec, parents[i], values) * spec.nodes[i].cardinality + values[i]];
    return p;
}

struct OracleFamilies {
    std::vector<std::vector<double>> tables;
    double evidence = 0.0;  // Σ_z p(z) Π e_i(z_i)
};

/// p(z_i, Pa_i | evidence) by full enumeration.
inline OracleFamilies oracle_family_marginals(const NetworkSpec& spec, const std::vector<Cpt>& cpts,
                                              const std::vector<std::vector<double>>& evidence) {
    const auto parents = oracle_parents(spec);
    const std::size_t n = spec.nodes.size();
    OracleFamilies out;
    out.tables.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.tables[i].assign(cpts[i].table.size(), 0.0);
    oracle_enumerate(spec, [&](const std::vector<int>& values) {
        double w = 1.0;
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) {
            idx[i] = oracle_row(spec, parents[i], values) * spec.nodes[i].cardinality + values[i];
            w *= cpts[i].table[idx[i]] * evidence[i][values[i]];
        }
        out.evidence += w;
        for (std::size_t i = 0; i < n; ++i) out.tables[i][idx[i]] += w;
    });
    for (auto& t : out.tables)
        for (auto& v : t) v /= out.evidence;
    return out;
}

/// Random positive evidence vectors, occasionally with exact zeros.
inline std::vector<std::vector<double>> random_evidence(std::mt19937_64& g, const NetworkSpec& spec,
                                                        double zero_prob = 0.0) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::bernoulli_distribution zero(zero_prob);
    std::vector<std::vector<double>> ev(spec.nodes.size());
    for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
        for (int v = 0; v < spec.nodes[i].cardinality; ++v) ev[i].push_back(zero(g) ? 0.0 : u(g));
        if (std::all_of(ev[i].begin(), ev[i].end(), [](double x) { return x == 0.0; })) ev[i][0] = 1.0;
    }
    return ev;
}

}  // namespace affem::testing
