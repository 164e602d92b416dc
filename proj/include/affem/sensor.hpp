#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "affem/random.hpp"

namespace affem {

class Structure;

/// Sensor reading vector: one continuous observation per node.
using Reading = std::vector<double>;

/// Gaussian emission model attached to every discrete node: reading | v ~
/// N(mean_v, sigma_v²). The benchmark uses one shared sigma per node; the
/// per-value form exists for mixtures whose components differ in width.
class SensorModel {
public:
    SensorModel() = default;

    /// One sigma per node, shared by all of its values.
    static SensorModel shared_sigma(std::vector<std::vector<double>> means, std::vector<double> sigmas);

    /// One sigma per (node, value).
    static SensorModel per_value_sigma(std::vector<std::vector<double>> means,
                                       std::vector<std::vector<double>> sigmas);

    /// mean_v = spacing · v for every node of `structure`, all with `sigma`.
    static SensorModel evenly_spaced(const Structure& structure, double sigma, double spacing = 5.0);

    std::size_t size() const { return means_.size(); }
    int cardinality(std::size_t node) const { return static_cast<int>(means_[node].size()); }
    const std::vector<double>& means(std::size_t node) const { return means_[node]; }
    const std::vector<double>& sigmas(std::size_t node) const { return sigmas_[node]; }
    double sigma(std::size_t node, int value) const { return sigmas_[node][value]; }
    /// True when every value of `node` shares one sigma.
    bool has_shared_sigma(std::size_t node) const;

    /// Throws Error{InitializationError} if node count or cardinalities disagree.
    void check_compatible(const Structure& structure) const;

private:
    SensorModel(std::vector<std::vector<double>> means, std::vector<std::vector<double>> sigmas);

    std::vector<std::vector<double>> means_;
    std::vector<std::vector<double>> sigmas_;
};

/// N(x; mean_v, sigma_v²) for every value v of `node`.
std::vector<double> emission_likelihoods(const SensorModel& model, std::size_t node, double x);

/// log N(x; mean_v, sigma_v²) for every value v of `node`.
std::vector<double> emission_log_likelihoods(const SensorModel& model, std::size_t node, double x);

/// Writes exp(log N_v − max_v log N_v) into `out` and returns the subtracted
/// maximum, so the vector is bounded by 1 and one entry equals 1.
double scaled_emission_likelihoods(const SensorModel& model, std::size_t node, double x,
                                   std::span<double> out);

double sample_reading(const SensorModel& model, std::size_t node, int value, Rng& rng);

/// p(v | x) ∝ N(x; mean_v, sigma_v²) · prior_v, normalized.
std::vector<double> responsibilities(const SensorModel& model, std::span<const double> prior,
                                     std::size_t node, double x);

/// argmax_v of the responsibilities; ties go to the smallest v.
int map_assign(const SensorModel& model, std::span<const double> prior, std::size_t node, double x);

}  // namespace affem
