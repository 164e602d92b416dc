#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affem/random.hpp"

namespace affem {

class JunctionTree;

struct NodeSpec {
    std::string name;
    int cardinality = 2;

    bool operator==(const NodeSpec&) const = default;
};

struct Arc {
    std::string parent;
    std::string child;

    bool operator==(const Arc&) const = default;
};

/// Node list plus arc list. The order in which a child's incoming arcs are
/// listed fixes its parent order: the first listed parent is the most
/// significant digit of the parent-configuration index.
struct NetworkSpec {
    std::vector<NodeSpec> nodes;
    std::vector<Arc> arcs;

    bool operator==(const NetworkSpec&) const = default;
};

/// One discrete value per node.
using Assignment = std::vector<int>;

/// Validated graph view of a NetworkSpec: parent index lists, topological
/// order and the mixed-radix layout of every family. Shared (immutable)
/// between all networks with the same spec.
class Structure {
public:
    /// Throws Error{InvalidSpec | UnknownNode | CycleDetected}.
    explicit Structure(NetworkSpec spec);

    Structure(const Structure&) = delete;
    Structure& operator=(const Structure&) = delete;

    const NetworkSpec& spec() const { return spec_; }
    std::size_t size() const { return spec_.nodes.size(); }
    int cardinality(std::size_t node) const { return spec_.nodes[node].cardinality; }
    const std::string& name(std::size_t node) const { return spec_.nodes[node].name; }
    const std::vector<std::size_t>& parents(std::size_t node) const { return parents_[node]; }
    const std::vector<std::size_t>& topo_order() const { return topo_order_; }

    /// Number of CPT rows of `node` (product of parent cardinalities).
    std::size_t parent_configurations(std::size_t node) const { return rows_[node]; }

    /// Row index of `node` for a full assignment (or any vector indexed by node).
    std::size_t parent_configuration(std::size_t node, std::span<const int> values) const;

    /// Index of a node by name; throws Error{UnknownNode}.
    std::size_t index_of(std::string_view name) const;

    /// Σ_i rows_i × (r_i − 1).
    std::size_t degrees_of_freedom() const;

    /// Product of all cardinalities, saturating at SIZE_MAX.
    std::size_t joint_configurations() const;

    /// Clique tree used by the factorized inference path; built on first use.
    const JunctionTree& junction_tree() const;

private:
    NetworkSpec spec_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::size_t> rows_;
    std::vector<std::size_t> topo_order_;

    mutable std::once_flag tree_once_;
    mutable std::shared_ptr<const JunctionTree> tree_;
};

/// Conditional probability table of one node: rows indexed by parent
/// configuration, each row a distribution over the node's values.
struct Cpt {
    std::size_t node = 0;
    int cardinality = 2;
    std::vector<double> table;  // rows × cardinality, row-major

    std::size_t rows() const { return cardinality > 0 ? table.size() / cardinality : 0; }
    std::span<const double> row(std::size_t r) const {
        return {table.data() + r * cardinality, static_cast<std::size_t>(cardinality)};
    }
    std::span<double> row(std::size_t r) {
        return {table.data() + r * cardinality, static_cast<std::size_t>(cardinality)};
    }

    bool operator==(const Cpt&) const = default;
};

/// A discrete Bayesian network: validated structure plus one CPT per node.
/// Immutable; copies share the structure.
class Network {
public:
    /// Validates the spec and the CPTs against it.
    /// Throws Error{CycleDetected | ShapeMismatch | NotNormalized | UnknownNode | InvalidSpec}.
    static Network validate(NetworkSpec spec, std::vector<Cpt> cpts);

    Network(std::shared_ptr<const Structure> structure, std::vector<Cpt> cpts);

    const Structure& structure() const { return *structure_; }
    const std::shared_ptr<const Structure>& structure_ptr() const { return structure_; }
    const NetworkSpec& spec() const { return structure_->spec(); }
    std::size_t size() const { return structure_->size(); }

    const std::vector<Cpt>& cpts() const { return cpts_; }
    const Cpt& cpt(std::size_t node) const { return cpts_[node]; }

    /// θ(node = value | parent row).
    double probability(std::size_t node, int value, std::size_t parent_row) const {
        return cpts_[node].table[parent_row * cpts_[node].cardinality + value];
    }

    Network with_cpts(std::vector<Cpt> cpts) const { return Network(structure_, std::move(cpts)); }

private:
    std::shared_ptr<const Structure> structure_;
    std::vector<Cpt> cpts_;
};

inline constexpr double kRowSumTolerance = 1e-9;

std::size_t degrees_of_freedom(const Network& net);

/// Σ_i log θ_i(a); −∞ when any factor is exactly zero.
double joint_log_prob(const Network& net, std::span<const int> assignment);

/// Samples every node in topological order from its CPT row.
Assignment ancestral_sample(const Network& net, Rng& rng);

/// All-uniform rows for every node.
std::vector<Cpt> uniform_cpts(const Structure& structure);

/// Rows drawn independently from a symmetric Dirichlet(alpha).
std::vector<Cpt> random_cpts(const Structure& structure, Rng& rng, double alpha = 1.0);

/// Calls `fn(values)` for every joint configuration, last node fastest.
template <class Fn>
void for_each_assignment(const Structure& structure, Fn&& fn) {
    const std::size_t n = structure.size();
    Assignment values(n, 0);
    while (true) {
        fn(static_cast<const Assignment&>(values));
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (++values[i] < structure.cardinality(i)) break;
            values[i] = 0;
            if (i == 0) return;
        }
        if (n == 0) return;
    }
}

}  // namespace affem
