#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affem/dataset.hpp"
#include "affem/em.hpp"
#include "affem/network.hpp"
#include "affem/sensor.hpp"

namespace affem {

/// Ground-truth network plus the sensor model that observes it.
struct BenchNetwork {
    Network network;
    SensorModel sensors;
};

/// Seven binary nodes X1..X7 with arcs X1→X7 and X2→X7 (10 free parameters).
NetworkSpec simple_network_spec();

/// Eight-node affordance topology (10 arcs, cardinalities 2..4, 125 free
/// parameters) loaded from the frozen data/complex_network.json.
/// Throws Error{ConfigError} if the frozen file breaks any of those counts.
NetworkSpec complex_network_spec();

/// Checks the four published counts of the complex topology.
void check_complex_topology(const NetworkSpec& spec);

/// Dirichlet(1) rows on the given topology, sensors with means 5·v and `sigma`.
BenchNetwork make_network(const NetworkSpec& spec, double sigma, Rng& rng);
BenchNetwork make_simple_network(Rng& rng, double sigma = 1.0);
BenchNetwork make_complex_network(Rng& rng, double sigma = 3.0);

struct SynthesizedData {
    Dataset readings;
    DiscretizedDataset truth;  // evaluation only; never handed to a learner
};

SynthesizedData synthesize_dataset(const Network& net, const SensorModel& sensors, std::size_t experiments,
                                   Rng& rng);

/// sqrt(mean over all CPT entries of the squared difference).
/// Throws Error{SpecMismatch} when the specs differ.
double rms_error(const Network& learned, const Network& truth);

enum class Algorithm { EM, Discrete };
std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

/// Prior fed to the MAP discretizer of the Discrete learner.
enum class MapPrior { TruthMarginal, Uniform };

struct ExperimentConfig {
    std::string network = "simple";  // simple | complex | path to a network document
    double sigma = 1.0;
    std::vector<std::size_t> sizes{300, 3000};
    int repetitions = 30;
    std::uint64_t seed = 1;
    EmConfig em;
    std::vector<Algorithm> algorithms{Algorithm::EM, Algorithm::Discrete};
    MapPrior map_prior = MapPrior::TruthMarginal;
    std::optional<std::filesystem::path> output_dir;
    unsigned threads = 0;  // 0 = hardware concurrency
    bool write_traces = true;

    /// Throws Error{ConfigError}.
    void validate() const;
};

struct TrialResult {
    std::string network;
    double sigma = 0.0;
    Algorithm algorithm = Algorithm::EM;
    std::size_t size = 0;
    int repetition = 0;
    double rms = 0.0;
    double log_likelihood = 0.0;
    int iterations = 0;
    std::string status;        // converged | max-iterations | closed-form | failed
    double wall_seconds = 0.0;
    std::string error;         // non-empty only for failed trials

    bool ok() const { return status != "failed"; }
};

/// Label written into results for a network template id ("simple",
/// "complex", or the file stem of a document path).
std::string network_label(std::string_view network);

/// Topology for a template id; reads the document for a path.
NetworkSpec resolve_network(std::string_view network);

/// Runs the full comparison. With an output directory, results are written
/// incrementally and completed trials found there are reused. Throws
/// Error{MonotonicityViolation} if any EM trace loses log-likelihood.
std::vector<TrialResult> run_suite(const ExperimentConfig& config);

struct SummaryRow {
    std::string network;
    double sigma = 0.0;
    std::size_t size = 0;
    Algorithm algorithm = Algorithm::EM;
    std::size_t trials = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    /// (1 − median_EM / median_Discrete) · 100, set on both rows of a cell
    /// when both algorithms are present.
    std::optional<double> reduction_percent;
};

/// Linear-interpolation quantile of an unsorted sample (p in [0, 1]).
double quantile(std::vector<double> values, double p);

/// Groups successful trials by (network, σ, size, algorithm).
/// Throws Error{InvalidArgument} for an empty input.
std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results);

void write_results_csv(const std::filesystem::path& path, const std::vector<TrialResult>& results);
std::vector<TrialResult> read_results_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
void write_summary_json(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
void write_trace_csv(const std::filesystem::path& path, const EmTrace& trace);

}  // namespace affem
