#include "affem/network.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <unordered_map>

#include "affem/error.hpp"
#include "affem/inference.hpp"

namespace affem {

Structure::Structure(NetworkSpec spec) : spec_(std::move(spec)) {
    const std::size_t n = spec_.nodes.size();
    if (n == 0) throw Error(ErrorCode::InvalidSpec, "network has no nodes");

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = spec_.nodes[i];
        if (node.name.empty()) throw Error(ErrorCode::InvalidSpec, "node " + std::to_string(i) + " has no name");
        if (node.cardinality < 2 || node.cardinality > 255)
            throw Error(ErrorCode::InvalidSpec,
                        "node '" + node.name + "' has cardinality " + std::to_string(node.cardinality) +
                            " (expected 2..255)");
        if (!index.emplace(node.name, i).second)
            throw Error(ErrorCode::InvalidSpec, "duplicate node name '" + node.name + "'");
    }

    parents_.assign(n, {});
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& arc : spec_.arcs) {
        auto p = index.find(arc.parent);
        if (p == index.end()) throw Error(ErrorCode::UnknownNode, "arc parent '" + arc.parent + "'");
        auto c = index.find(arc.child);
        if (c == index.end()) throw Error(ErrorCode::UnknownNode, "arc child '" + arc.child + "'");
        if (p->second == c->second) throw Error(ErrorCode::InvalidSpec, "self-arc on '" + arc.parent + "'");
        if (!seen.emplace(p->second, c->second).second)
            throw Error(ErrorCode::InvalidSpec, "duplicate arc " + arc.parent + " -> " + arc.child);
        parents_[c->second].push_back(p->second);
    }

    // Kahn's algorithm, smallest ready index first
    std::vector<std::size_t> indegree(n, 0);
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t c = 0; c < n; ++c) {
        indegree[c] = parents_[c].size();
        for (auto p : parents_[c]) children[p].push_back(c);
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) ready.push(i);
    while (!ready.empty()) {
        auto i = ready.top();
        ready.pop();
        topo_order_.push_back(i);
        for (auto c : children[i])
            if (--indegree[c] == 0) ready.push(c);
    }
    if (topo_order_.size() != n) throw Error(ErrorCode::CycleDetected, "arc set contains a directed cycle");

    rows_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rows = 1;
        for (auto p : parents_[i]) {
            const auto card = static_cast<std::size_t>(cardinality(p));
            if (rows > std::numeric_limits<std::uint32_t>::max() / card)
                throw Error(ErrorCode::InvalidSpec, "too many parent configurations for '" + name(i) + "'");
            rows *= card;
        }
        rows_[i] = rows;
    }
}

std::size_t Structure::parent_configuration(std::size_t node, std::span<const int> values) const {
    std::size_t row = 0;
    for (auto p : parents_[node]) row = row * cardinality(p) + static_cast<std::size_t>(values[p]);
    return row;
}

std::size_t Structure::index_of(std::string_view node_name) const {
    for (std::size_t i = 0; i < size(); ++i)
        if (spec_.nodes[i].name == node_name) return i;
    throw Error(ErrorCode::UnknownNode, "no node named '" + std::string(node_name) + "'");
}

std::size_t Structure::degrees_of_freedom() const {
    std::size_t dof = 0;
    for (std::size_t i = 0; i < size(); ++i) dof += rows_[i] * static_cast<std::size_t>(cardinality(i) - 1);
    return dof;
}

std::size_t Structure::joint_configurations() const {
    std::size_t total = 1;
    for (std::size_t i = 0; i < size(); ++i) {
        const auto card = static_cast<std::size_t>(cardinality(i));
        if (total > std::numeric_limits<std::size_t>::max() / card) return std::numeric_limits<std::size_t>::max();
        total *= card;
    }
    return total;
}

const JunctionTree& Structure::junction_tree() const {
    std::call_once(tree_once_, [this] { tree_ = std::make_shared<const JunctionTree>(*this); });
    return *tree_;
}

Network::Network(std::shared_ptr<const Structure> structure, std::vector<Cpt> cpts)
    : structure_(std::move(structure)), cpts_(std::move(cpts)) {
    const auto& s = *structure_;
    if (cpts_.size() != s.size())
        throw Error(ErrorCode::ShapeMismatch,
                    std::to_string(cpts_.size()) + " CPTs for " + std::to_string(s.size()) + " nodes");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& cpt = cpts_[i];
        if (cpt.node != i)
            throw Error(ErrorCode::ShapeMismatch, "CPT " + std::to_string(i) + " is tagged with node " +
                                                      std::to_string(cpt.node));
        if (cpt.cardinality != s.cardinality(i))
            throw Error(ErrorCode::ShapeMismatch, "CPT of '" + s.name(i) + "' has " +
                                                      std::to_string(cpt.cardinality) + " columns, expected " +
                                                      std::to_string(s.cardinality(i)));
        if (cpt.table.size() != s.parent_configurations(i) * static_cast<std::size_t>(cpt.cardinality))
            throw Error(ErrorCode::ShapeMismatch, "CPT of '" + s.name(i) + "' has " +
                                                      std::to_string(cpt.table.size()) + " entries, expected " +
                                                      std::to_string(s.parent_configurations(i) *
                                                                     static_cast<std::size_t>(cpt.cardinality)));
        for (std::size_t r = 0; r < cpt.rows(); ++r) {
            double sum = 0.0;
            for (double p : cpt.row(r)) {
                if (!(p >= 0.0 && p <= 1.0))
                    throw Error(ErrorCode::NotNormalized,
                                "CPT of '" + s.name(i) + "' row " + std::to_string(r) + " has entry outside [0, 1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance)
                throw Error(ErrorCode::NotNormalized,
                            "CPT of '" + s.name(i) + "' row " + std::to_string(r) + " sums to " + std::to_string(sum));
        }
    }
}

Network Network::validate(NetworkSpec spec, std::vector<Cpt> cpts) {
    return Network(std::make_shared<const Structure>(std::move(spec)), std::move(cpts));
}

std::size_t degrees_of_freedom(const Network& net) { return net.structure().degrees_of_freedom(); }

double joint_log_prob(const Network& net, std::span<const int> assignment) {
    const auto& s = net.structure();
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double p = net.probability(i, assignment[i], s.parent_configuration(i, assignment));
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        total += std::log(p);
    }
    return total;
}

Assignment ancestral_sample(const Network& net, Rng& rng) {
    const auto& s = net.structure();
    Assignment values(s.size(), 0);
    for (auto i : s.topo_order()) {
        const auto row = net.cpt(i).row(s.parent_configuration(i, values));
        values[i] = sample_categorical(rng, row.data(), row.size());
    }
    return values;
}

std::vector<Cpt> uniform_cpts(const Structure& structure) {
    std::vector<Cpt> cpts;
    cpts.reserve(structure.size());
    for (std::size_t i = 0; i < structure.size(); ++i) {
        const int r = structure.cardinality(i);
        cpts.push_back({i, r, std::vector<double>(structure.parent_configurations(i) * r, 1.0 / r)});
    }
    return cpts;
}

std::vector<Cpt> random_cpts(const Structure& structure, Rng& rng, double alpha) {
    std::vector<Cpt> cpts;
    cpts.reserve(structure.size());
    for (std::size_t i = 0; i < structure.size(); ++i) {
        const int r = structure.cardinality(i);
        Cpt cpt{i, r, {}};
        cpt.table.reserve(structure.parent_configurations(i) * r);
        for (std::size_t row = 0; row < structure.parent_configurations(i); ++row) {
            auto draw = sample_dirichlet(rng, static_cast<std::size_t>(r), alpha);
            cpt.table.insert(cpt.table.end(), draw.begin(), draw.end());
        }
        cpts.push_back(std::move(cpt));
    }
    return cpts;
}

}  // namespace affem
