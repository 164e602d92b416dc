#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "affem/dataset.hpp"
#include "affem/inference.hpp"
#include "affem/network.hpp"
#include "affem/random.hpp"
#include "affem/sensor.hpp"

namespace affem {

enum class InitMode { Uniform, RandomDirichlet };

struct EmConfig {
    double convergence_rms_threshold = 1e-3;
    int max_iterations = 100;
    InitMode init = InitMode::RandomDirichlet;
    InferenceMethod method = InferenceMethod::JunctionTree;

    /// Throws Error{InvalidArgument}.
    void validate() const;
};

/// p(z_i, Pa_i | y^(k), θ_old) for every experiment k and node i, stored as
/// one contiguous block per experiment in CPT layout.
class FamilyPosterior {
public:
    FamilyPosterior() = default;
    FamilyPosterior(const Structure& structure, std::size_t experiments);

    std::size_t experiments() const { return experiments_; }
    std::size_t nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t table_size(std::size_t node) const { return offsets_[node + 1] - offsets_[node]; }

    std::span<const double> table(std::size_t k, std::size_t node) const {
        return {data_.data() + k * stride() + offsets_[node], table_size(node)};
    }
    std::span<double> table(std::size_t k, std::size_t node) {
        return {data_.data() + k * stride() + offsets_[node], table_size(node)};
    }
    std::span<double> experiment(std::size_t k) { return {data_.data() + k * stride(), stride()}; }

private:
    std::size_t stride() const { return offsets_.back(); }

    std::size_t experiments_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<double> data_;
};

enum class EmStatus { Converged, MaxIterations };

std::string_view to_string(EmStatus status);

struct EmIteration {
    double log_likelihood = 0.0;  // observed-data log-likelihood of the parameters entering the iteration
    double rms_delta = 0.0;       // RMS change of all CPT entries made by the iteration's M-step
};

struct EmTrace {
    std::vector<EmIteration> iterations;
    double final_log_likelihood = 0.0;  // of the returned parameters
    EmStatus status = EmStatus::MaxIterations;

    /// Log-likelihood sequence (iterations then final) never drops by more than `slack`.
    bool is_monotone(double slack = 1e-9) const;
};

struct EmResult {
    Network network;
    EmTrace trace;
};

/// Per-experiment scaled emission likelihoods in InferenceWorkspace layout
/// plus the log scale removed from each experiment.
struct ScaledEvidence {
    std::vector<double> values;      // experiments × evidence_size
    std::vector<double> log_scale;   // per experiment
    std::size_t stride = 0;

    std::span<const double> row(std::size_t k) const { return {values.data() + k * stride, stride}; }
};

/// Throws Error{EvidenceShapeMismatch} when the dataset does not cover every node.
ScaledEvidence scale_evidence(const Structure& structure, const SensorModel& sensors, const Dataset& data);

FamilyPosterior e_step(const Network& net, const SensorModel& sensors, const Dataset& data,
                       InferenceMethod method = InferenceMethod::JunctionTree);

/// θ_i(z | pa) = Σ_k p(z, pa | y^k) / Σ_z' Σ_k p(z', pa | y^k); rows with a
/// zero denominator become uniform.
std::vector<Cpt> m_step(const FamilyPosterior& posteriors, const Structure& structure);

/// Row-normalizes accumulated family counts (CPT layout, one vector per
/// node), adding `pseudo_count` to every cell first. Zero rows become uniform.
std::vector<Cpt> normalize_counts(const Structure& structure, const std::vector<std::vector<double>>& counts,
                                  double pseudo_count = 0.0);

/// Σ_k log Σ_z p(y^k | z) p(z | θ).
double observed_loglik(const Network& net, const SensorModel& sensors, const Dataset& data,
                       InferenceMethod method = InferenceMethod::JunctionTree);

/// RMS difference over every CPT entry of two parameter sets with equal shapes.
double rms_difference(std::span<const Cpt> a, std::span<const Cpt> b);

EmResult run_em(const NetworkSpec& spec, const SensorModel& sensors, const Dataset& data,
                const EmConfig& config, Rng& rng);

EmResult run_em(std::shared_ptr<const Structure> structure, const SensorModel& sensors, const Dataset& data,
                const EmConfig& config, Rng& rng);

}  // namespace affem
