#include "affem/em.hpp"

#include <cmath>

#include "affem/error.hpp"

namespace affem {

namespace {

/// Neumaier-compensated running sum; keeps the per-iteration log-likelihood
/// stable enough for the 1e-9 monotonicity check at K = 10^4.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            correction_ += (sum_ - t) + x;
        else
            correction_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + correction_; }

private:
    double sum_ = 0.0;
    double correction_ = 0.0;
};

std::vector<std::vector<double>> zero_counts(const Structure& s) {
    std::vector<std::vector<double>> counts(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        counts[i].assign(s.parent_configurations(i) * static_cast<std::size_t>(s.cardinality(i)), 0.0);
    return counts;
}

Evidence evidence_row(const Structure& s, std::span<const double> row) {
    Evidence ev(s.size());
    std::size_t offset = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto r = static_cast<std::size_t>(s.cardinality(i));
        ev[i].assign(row.begin() + offset, row.begin() + offset + r);
        offset += r;
    }
    return ev;
}

[[noreturn]] void throw_all_zero(std::size_t k) {
    throw Error(ErrorCode::AllZeroLikelihood, "experiment " + std::to_string(k) + " has zero likelihood");
}

struct Statistics {
    std::vector<std::vector<double>> counts;
    double log_likelihood = 0.0;
};

/// Expected family counts Σ_k p(z_i, Pa_i | y^k) and the observed-data
/// log-likelihood, accumulated in experiment order.
Statistics expected_statistics(const Network& net, const ScaledEvidence& ev, InferenceMethod method,
                               InferenceWorkspace& ws) {
    const auto& s = net.structure();
    Statistics stats{zero_counts(s), 0.0};
    CompensatedSum loglik;
    const std::size_t experiments = ev.log_scale.size();

    if (method == InferenceMethod::Enumeration) {
        for (std::size_t k = 0; k < experiments; ++k) {
            auto tables = family_marginals(net, evidence_row(s, ev.row(k)), InferenceMethod::Enumeration);
            loglik.add(tables.log_evidence + ev.log_scale[k]);
            for (std::size_t i = 0; i < s.size(); ++i)
                for (std::size_t j = 0; j < tables.tables[i].size(); ++j) stats.counts[i][j] += tables.tables[i][j];
        }
        stats.log_likelihood = loglik.value();
        return stats;
    }

    ws.set_parameters(net);
    std::vector<double> family(ws.family_total());
    for (std::size_t k = 0; k < experiments; ++k) {
        auto log_z = ws.calibrate(ev.row(k));
        if (!log_z) throw_all_zero(k);
        loglik.add(*log_z + ev.log_scale[k]);
        for (std::size_t i = 0; i < s.size(); ++i) {
            std::span<double> table(family.data() + ws.family_offset(i), stats.counts[i].size());
            ws.family_table(i, table);
            auto& counts = stats.counts[i];
            for (std::size_t j = 0; j < counts.size(); ++j) counts[j] += table[j];
        }
    }
    stats.log_likelihood = loglik.value();
    return stats;
}

}  // namespace

void EmConfig::validate() const {
    if (!(convergence_rms_threshold > 0.0))
        throw Error(ErrorCode::InvalidArgument, "convergence threshold must be > 0");
    if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
}

std::string_view to_string(EmStatus status) {
    return status == EmStatus::Converged ? "converged" : "max-iterations";
}

bool EmTrace::is_monotone(double slack) const {
    for (std::size_t t = 1; t < iterations.size(); ++t)
        if (iterations[t].log_likelihood < iterations[t - 1].log_likelihood - slack) return false;
    return iterations.empty() || final_log_likelihood >= iterations.back().log_likelihood - slack;
}

FamilyPosterior::FamilyPosterior(const Structure& structure, std::size_t experiments) : experiments_(experiments) {
    offsets_.assign(structure.size() + 1, 0);
    for (std::size_t i = 0; i < structure.size(); ++i)
        offsets_[i + 1] =
            offsets_[i] + structure.parent_configurations(i) * static_cast<std::size_t>(structure.cardinality(i));
    data_.assign(experiments * offsets_.back(), 0.0);
}

ScaledEvidence scale_evidence(const Structure& structure, const SensorModel& sensors, const Dataset& data) {
    sensors.check_compatible(structure);
    if (data.columns() != structure.size())
        throw Error(ErrorCode::EvidenceShapeMismatch, "dataset has " + std::to_string(data.columns()) +
                                                          " sensor columns for " + std::to_string(structure.size()) +
                                                          " nodes");
    ScaledEvidence ev;
    for (std::size_t i = 0; i < structure.size(); ++i) ev.stride += static_cast<std::size_t>(structure.cardinality(i));
    ev.values.resize(data.size() * ev.stride);
    ev.log_scale.resize(data.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto row = data.row(k);
        double scale = 0.0;
        std::size_t offset = k * ev.stride;
        for (std::size_t i = 0; i < structure.size(); ++i) {
            if (!std::isfinite(row[i]))
                throw Error(ErrorCode::EvidenceShapeMismatch,
                            "experiment " + std::to_string(k) + " has a non-finite reading for '" + structure.name(i) + "'");
            const auto r = static_cast<std::size_t>(structure.cardinality(i));
            scale += scaled_emission_likelihoods(sensors, i, row[i], {ev.values.data() + offset, r});
            offset += r;
        }
        ev.log_scale[k] = scale;
    }
    return ev;
}

FamilyPosterior e_step(const Network& net, const SensorModel& sensors, const Dataset& data, InferenceMethod method) {
    const auto& s = net.structure();
    const auto ev = scale_evidence(s, sensors, data);
    FamilyPosterior out(s, data.size());

    if (method == InferenceMethod::Enumeration) {
        for (std::size_t k = 0; k < data.size(); ++k) {
            auto tables = family_marginals(net, evidence_row(s, ev.row(k)), InferenceMethod::Enumeration);
            for (std::size_t i = 0; i < s.size(); ++i) {
                auto dst = out.table(k, i);
                std::copy(tables.tables[i].begin(), tables.tables[i].end(), dst.begin());
            }
        }
        return out;
    }

    InferenceWorkspace ws(net);
    for (std::size_t k = 0; k < data.size(); ++k) {
        if (!ws.calibrate(ev.row(k))) throw_all_zero(k);
        for (std::size_t i = 0; i < s.size(); ++i) ws.family_table(i, out.table(k, i));
    }
    return out;
}

std::vector<Cpt> normalize_counts(const Structure& structure, const std::vector<std::vector<double>>& counts,
                                  double pseudo_count) {
    if (counts.size() != structure.size())
        throw Error(ErrorCode::ShapeMismatch, "count tables do not match the node count");
    std::vector<Cpt> cpts;
    cpts.reserve(structure.size());
    for (std::size_t i = 0; i < structure.size(); ++i) {
        const int r = structure.cardinality(i);
        const std::size_t rows = structure.parent_configurations(i);
        if (counts[i].size() != rows * static_cast<std::size_t>(r))
            throw Error(ErrorCode::ShapeMismatch, "count table of '" + structure.name(i) + "' has the wrong size");
        Cpt cpt{i, r, std::vector<double>(counts[i].size())};
        for (std::size_t row = 0; row < rows; ++row) {
            const double* c = counts[i].data() + row * static_cast<std::size_t>(r);
            double total = 0.0;
            for (int v = 0; v < r; ++v) total += c[v] + pseudo_count;
            auto out = cpt.row(row);
            for (int v = 0; v < r; ++v) out[v] = total > 0.0 ? (c[v] + pseudo_count) / total : 1.0 / r;
        }
        cpts.push_back(std::move(cpt));
    }
    return cpts;
}

std::vector<Cpt> m_step(const FamilyPosterior& posteriors, const Structure& structure) {
    if (posteriors.nodes() != structure.size())
        throw Error(ErrorCode::ShapeMismatch, "posterior tables do not match the network");
    auto counts = zero_counts(structure);
    for (std::size_t i = 0; i < structure.size(); ++i) {
        if (posteriors.table_size(i) != counts[i].size())
            throw Error(ErrorCode::ShapeMismatch, "posterior table of '" + structure.name(i) + "' has the wrong size");
        for (std::size_t k = 0; k < posteriors.experiments(); ++k) {
            const auto table = posteriors.table(k, i);
            for (std::size_t j = 0; j < table.size(); ++j) counts[i][j] += table[j];
        }
    }
    return normalize_counts(structure, counts);
}

double observed_loglik(const Network& net, const SensorModel& sensors, const Dataset& data, InferenceMethod method) {
    const auto ev = scale_evidence(net.structure(), sensors, data);
    InferenceWorkspace ws(net);
    return expected_statistics(net, ev, method, ws).log_likelihood;
}

double rms_difference(std::span<const Cpt> a, std::span<const Cpt> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::SpecMismatch, "parameter sets have different node counts");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].table.size() != b[i].table.size() || a[i].cardinality != b[i].cardinality)
            throw Error(ErrorCode::SpecMismatch, "CPT shapes differ at node " + std::to_string(i));
        for (std::size_t j = 0; j < a[i].table.size(); ++j) {
            const double d = a[i].table[j] - b[i].table[j];
            sum += d * d;
        }
        count += a[i].table.size();
    }
    return count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
}

EmResult run_em(const NetworkSpec& spec, const SensorModel& sensors, const Dataset& data, const EmConfig& config,
                Rng& rng) {
    return run_em(std::make_shared<const Structure>(spec), sensors, data, config, rng);
}

EmResult run_em(std::shared_ptr<const Structure> structure, const SensorModel& sensors, const Dataset& data,
                const EmConfig& config, Rng& rng) {
    config.validate();
    sensors.check_compatible(*structure);
    if (data.columns() != structure->size())
        throw Error(ErrorCode::InitializationError, "dataset columns do not match the network");

    const auto ev = scale_evidence(*structure, sensors, data);
    auto init = config.init == InitMode::Uniform ? uniform_cpts(*structure) : random_cpts(*structure, rng);
    Network current(structure, std::move(init));
    InferenceWorkspace ws(current);

    EmTrace trace;
    for (int it = 0; it < config.max_iterations; ++it) {
        auto stats = expected_statistics(current, ev, config.method, ws);
        auto next = normalize_counts(*structure, stats.counts);
        const double delta = rms_difference(next, current.cpts());
        trace.iterations.push_back({stats.log_likelihood, delta});
        current = current.with_cpts(std::move(next));
        if (delta < config.convergence_rms_threshold) {
            trace.status = EmStatus::Converged;
            break;
        }
    }
    trace.final_log_likelihood = expected_statistics(current, ev, config.method, ws).log_likelihood;
    return {std::move(current), std::move(trace)};
}

}  // namespace affem
