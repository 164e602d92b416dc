#include "affem/structure_search.hpp"

#include <algorithm>
#include <cmath>

#include "affem/error.hpp"

namespace affem {

double family_score(const DiscretizedDataset& data, std::span<const int> cardinalities, std::size_t node,
                    std::span<const std::size_t> parents) {
    if (node >= cardinalities.size()) throw Error(ErrorCode::UnknownNode, "node index " + std::to_string(node));
    if (std::find(parents.begin(), parents.end(), node) != parents.end())
        throw Error(ErrorCode::InvalidArgument, "a node cannot be its own parent");
    const auto r = static_cast<std::size_t>(cardinalities[node]);
    std::size_t rows = 1;
    for (auto p : parents) {
        if (p >= cardinalities.size()) throw Error(ErrorCode::UnknownNode, "parent index " + std::to_string(p));
        rows *= static_cast<std::size_t>(cardinalities[p]);
    }

    std::vector<std::size_t> counts(rows * r, 0);
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto row = data.row(k);
        if (row[node] < 0 || row[node] >= cardinalities[node])
            throw Error(ErrorCode::ShapeMismatch, "value out of range in experiment " + std::to_string(k));
        std::size_t j = 0;
        for (auto p : parents) {
            if (row[p] < 0 || row[p] >= cardinalities[p])
                throw Error(ErrorCode::ShapeMismatch, "value out of range in experiment " + std::to_string(k));
            j = j * static_cast<std::size_t>(cardinalities[p]) + static_cast<std::size_t>(row[p]);
        }
        ++counts[j * r + static_cast<std::size_t>(row[node])];
    }

    const double lgamma_r = std::lgamma(static_cast<double>(r));
    double score = 0.0;
    for (std::size_t j = 0; j < rows; ++j) {
        std::size_t total = 0;
        double values = 0.0;
        for (std::size_t v = 0; v < r; ++v) {
            const auto c = counts[j * r + v];
            total += c;
            values += std::lgamma(static_cast<double>(c) + 1.0);
        }
        if (total == 0) continue;  // the row contributes lnΓ(r) − lnΓ(r) = 0
        score += lgamma_r - std::lgamma(static_cast<double>(total + r)) + values;
    }
    return score;
}

NetworkSpec k2_search(const DiscretizedDataset& data, const std::vector<NodeSpec>& nodes, const NodeOrder& order,
                      std::size_t max_parents) {
    const std::size_t n = nodes.size();
    if (data.columns() != n) throw Error(ErrorCode::ShapeMismatch, "dataset columns do not match the node list");
    std::vector<char> seen(n, 0);
    if (order.size() != n) throw Error(ErrorCode::InvalidArgument, "node order must list every node once");
    for (auto i : order) {
        if (i >= n || seen[i]) throw Error(ErrorCode::InvalidArgument, "node order is not a permutation");
        seen[i] = 1;
    }
    std::vector<int> cards(n);
    for (std::size_t i = 0; i < n; ++i) cards[i] = nodes[i].cardinality;

    NetworkSpec spec{nodes, {}};
    for (std::size_t pos = 0; pos < n; ++pos) {
        const auto node = order[pos];
        std::vector<std::size_t> parents;
        double best = family_score(data, cards, node, parents);
        while (parents.size() < max_parents) {
            std::size_t pick = n;
            double pick_score = best;
            // predecessors in ascending index order, so the first strict
            // improvement wins ties
            std::vector<std::size_t> candidates(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pos));
            std::sort(candidates.begin(), candidates.end());
            for (auto c : candidates) {
                if (std::find(parents.begin(), parents.end(), c) != parents.end()) continue;
                parents.push_back(c);
                const double score = family_score(data, cards, node, parents);
                parents.pop_back();
                if (score > pick_score) {
                    pick = c;
                    pick_score = score;
                }
            }
            if (pick == n) break;
            parents.push_back(pick);
            best = pick_score;
        }
        for (auto p : parents) spec.arcs.push_back({nodes[p].name, nodes[node].name});
    }
    return spec;
}

}  // namespace affem
