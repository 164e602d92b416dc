#include "affem/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "affem/error.hpp"
#include "affem/network.hpp"

namespace affem {

namespace {

const double kLogSqrtTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_normal_density(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return -0.5 * z * z - std::log(sigma) - kLogSqrtTwoPi;
}

}  // namespace

SensorModel::SensorModel(std::vector<std::vector<double>> means, std::vector<std::vector<double>> sigmas)
    : means_(std::move(means)), sigmas_(std::move(sigmas)) {
    if (means_.size() != sigmas_.size())
        throw Error(ErrorCode::InvalidArgument, "sensor model needs one sigma entry per node");
    for (std::size_t i = 0; i < means_.size(); ++i) {
        if (means_[i].empty()) throw Error(ErrorCode::InvalidArgument, "sensor " + std::to_string(i) + " has no means");
        if (sigmas_[i].size() != means_[i].size())
            throw Error(ErrorCode::InvalidArgument, "sensor " + std::to_string(i) + " needs one sigma per value");
        for (double m : means_[i])
            if (!std::isfinite(m)) throw Error(ErrorCode::InvalidArgument, "sensor means must be finite");
        for (double s : sigmas_[i])
            if (!(s > 0.0) || !std::isfinite(s))
                throw Error(ErrorCode::InvalidArgument, "sensor sigma must be finite and > 0");
    }
}

SensorModel SensorModel::shared_sigma(std::vector<std::vector<double>> means, std::vector<double> sigmas) {
    if (means.size() != sigmas.size())
        throw Error(ErrorCode::InvalidArgument, "sensor model needs one sigma per node");
    std::vector<std::vector<double>> expanded(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) expanded[i].assign(means[i].size(), sigmas[i]);
    return SensorModel(std::move(means), std::move(expanded));
}

SensorModel SensorModel::per_value_sigma(std::vector<std::vector<double>> means,
                                         std::vector<std::vector<double>> sigmas) {
    return SensorModel(std::move(means), std::move(sigmas));
}

SensorModel SensorModel::evenly_spaced(const Structure& structure, double sigma, double spacing) {
    std::vector<std::vector<double>> means(structure.size());
    for (std::size_t i = 0; i < structure.size(); ++i)
        for (int v = 0; v < structure.cardinality(i); ++v) means[i].push_back(spacing * v);
    return shared_sigma(std::move(means), std::vector<double>(structure.size(), sigma));
}

bool SensorModel::has_shared_sigma(std::size_t node) const {
    const auto& s = sigmas_[node];
    return std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
}

void SensorModel::check_compatible(const Structure& structure) const {
    if (size() != structure.size())
        throw Error(ErrorCode::InitializationError, "sensor model has " + std::to_string(size()) +
                                                        " sensors for " + std::to_string(structure.size()) + " nodes");
    for (std::size_t i = 0; i < size(); ++i)
        if (cardinality(i) != structure.cardinality(i))
            throw Error(ErrorCode::InitializationError, "sensor for '" + structure.name(i) + "' has " +
                                                            std::to_string(cardinality(i)) + " means, expected " +
                                                            std::to_string(structure.cardinality(i)));
}

std::vector<double> emission_log_likelihoods(const SensorModel& model, std::size_t node, double x) {
    const auto& means = model.means(node);
    const auto& sigmas = model.sigmas(node);
    std::vector<double> out(means.size());
    for (std::size_t v = 0; v < means.size(); ++v) out[v] = log_normal_density(x, means[v], sigmas[v]);
    return out;
}

std::vector<double> emission_likelihoods(const SensorModel& model, std::size_t node, double x) {
    auto out = emission_log_likelihoods(model, node, x);
    for (auto& v : out) v = std::exp(v);
    return out;
}

double scaled_emission_likelihoods(const SensorModel& model, std::size_t node, double x, std::span<double> out) {
    const auto& means = model.means(node);
    const auto& sigmas = model.sigmas(node);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < means.size(); ++v) {
        out[v] = log_normal_density(x, means[v], sigmas[v]);
        top = std::max(top, out[v]);
    }
    for (std::size_t v = 0; v < means.size(); ++v) out[v] = std::exp(out[v] - top);
    return top;
}

double sample_reading(const SensorModel& model, std::size_t node, int value, Rng& rng) {
    std::normal_distribution<double> normal(model.means(node)[value], model.sigma(node, value));
    return normal(rng);
}

std::vector<double> responsibilities(const SensorModel& model, std::span<const double> prior, std::size_t node,
                                     double x) {
    if (prior.size() != static_cast<std::size_t>(model.cardinality(node)))
        throw Error(ErrorCode::EvidenceShapeMismatch, "prior length does not match the sensor's value count");
    auto post = emission_log_likelihoods(model, node, x);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < post.size(); ++v) {
        post[v] = prior[v] > 0.0 ? post[v] + std::log(prior[v]) : -std::numeric_limits<double>::infinity();
        top = std::max(top, post[v]);
    }
    if (!std::isfinite(top)) throw Error(ErrorCode::AllZeroLikelihood, "prior has no positive entry");
    double total = 0.0;
    for (auto& v : post) total += v = std::exp(v - top);
    for (auto& v : post) v /= total;
    return post;
}

int map_assign(const SensorModel& model, std::span<const double> prior, std::size_t node, double x) {
    const auto post = responsibilities(model, prior, node, x);
    // max_element returns the first maximum, i.e. the smallest value wins ties
    return static_cast<int>(std::max_element(post.begin(), post.end()) - post.begin());
}

}  // namespace affem
