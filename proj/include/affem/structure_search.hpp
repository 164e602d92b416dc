#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "affem/dataset.hpp"
#include "affem/network.hpp"

namespace affem {

/// Permutation of node indices; K2 only considers parents that come earlier.
using NodeOrder = std::vector<std::size_t>;

/// K2 log marginal likelihood of one family under Dirichlet(1) priors:
/// Σ_rows [lnΓ(r) − lnΓ(N_j + r) + Σ_v lnΓ(N_jv + 1)].
double family_score(const DiscretizedDataset& data, std::span<const int> cardinalities, std::size_t node,
                    std::span<const std::size_t> parents);

/// Greedy K2 search. `nodes` supplies names and cardinalities (its order
/// matches the data columns). Ties between candidate parents go to the
/// smaller node index. Throws Error{InvalidArgument} for an invalid order.
NetworkSpec k2_search(const DiscretizedDataset& data, const std::vector<NodeSpec>& nodes,
                      const NodeOrder& order, std::size_t max_parents);

}  // namespace affem
