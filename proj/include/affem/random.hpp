#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace affem {

using Rng = std::mt19937_64;

/// Derives an independent seed for a keyed substream of `master`
/// (splitmix64 chained over the keys). Used to give every benchmark trial
/// its own generator regardless of scheduling order.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

/// One draw from a symmetric Dirichlet(alpha, ..., alpha) of dimension n.
std::vector<double> sample_dirichlet(Rng& rng, std::size_t n, double alpha = 1.0);

/// Index drawn from an (already normalized) probability vector.
int sample_categorical(Rng& rng, const double* probs, std::size_t n);

}  // namespace affem
