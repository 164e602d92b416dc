#pragma once

#include <memory>
#include <vector>

#include "affem/dataset.hpp"
#include "affem/network.hpp"
#include "affem/sensor.hpp"

namespace affem {

/// Hard MAP label for every reading: argmax_v N(x; mean_v, σ) · prior_i(v).
/// `priors` holds one normalized vector per node.
DiscretizedDataset discretize(const SensorModel& sensors, const std::vector<std::vector<double>>& priors,
                              const Dataset& data);

/// Per-node accumulated family counts in CPT layout.
std::vector<std::vector<double>> family_counts(const Structure& structure, const DiscretizedDataset& data);

/// Empirical conditional frequencies; rows never observed are uniform.
Network count_mle(const DiscretizedDataset& data, std::shared_ptr<const Structure> structure);
Network count_mle(const DiscretizedDataset& data, const NetworkSpec& spec);

/// Dirichlet(pseudo_count) posterior mean:
/// (count + a) / (row total + r · a). Throws Error{InvalidArgument} for a ≤ 0.
Network count_bayes(const DiscretizedDataset& data, std::shared_ptr<const Structure> structure,
                    double pseudo_count);
Network count_bayes(const DiscretizedDataset& data, const NetworkSpec& spec, double pseudo_count);

}  // namespace affem
