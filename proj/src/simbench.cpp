#include "affem/simbench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "affem/baseline.hpp"
#include "affem/error.hpp"
#include "affem/inference.hpp"
#include "affem/serialize.hpp"
#include "json.hpp"

namespace affem {

namespace detail {
extern const std::string_view kComplexNetworkDocument;
}

namespace {

using Json = nlohmann::ordered_json;

// substream tags for derive_seed
constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kDataStream = 2;
constexpr std::uint64_t kInitStream = 3;

constexpr const char* kResultsHeader =
    "network,sigma,algorithm,size,repetition,rms,log_likelihood,iterations,status,wall_seconds,error";

std::string number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string sanitize(std::string text) {
    for (auto& c : text)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return text;
}

std::string results_line(const TrialResult& r) {
    std::ostringstream line;
    line << r.network << ',' << number(r.sigma) << ',' << to_string(r.algorithm) << ',' << r.size << ','
         << r.repetition << ',' << number(r.rms) << ',' << number(r.log_likelihood) << ',' << r.iterations << ','
         << r.status << ',' << number(r.wall_seconds) << ',' << sanitize(r.error);
    return line.str();
}

template <class T>
T parse_field(std::string_view text) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw Error(ErrorCode::ParseError, "cannot parse '" + std::string(text) + "'");
    return value;
}

TrialResult parse_results_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 11) throw Error(ErrorCode::ParseError, "results row has " + std::to_string(fields.size()) + " fields");
    TrialResult r;
    r.network = fields[0];
    r.sigma = parse_field<double>(fields[1]);
    r.algorithm = parse_algorithm(fields[2]);
    r.size = parse_field<std::size_t>(fields[3]);
    r.repetition = parse_field<int>(fields[4]);
    r.rms = parse_field<double>(fields[5]);
    r.log_likelihood = parse_field<double>(fields[6]);
    r.iterations = parse_field<int>(fields[7]);
    r.status = fields[8];
    r.wall_seconds = parse_field<double>(fields[9]);
    r.error = fields[10];
    return r;
}

std::vector<TrialResult> read_results(const std::filesystem::path& path, bool lenient) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw Error(ErrorCode::ParseError, path.string() + ": unexpected header");
    std::vector<TrialResult> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(parse_results_line(line));
        } catch (const Error&) {
            // an interrupted run can leave a truncated last line
            if (!lenient) throw;
        }
    }
    return out;
}

auto result_key(const TrialResult& r) { return std::make_tuple(r.repetition, r.size, static_cast<int>(r.algorithm)); }

Json config_json(const ExperimentConfig& c) {
    Json algorithms = Json::array();
    for (auto a : c.algorithms) algorithms.push_back(std::string(to_string(a)));
    return Json{{"network", c.network},
                {"sigma", c.sigma},
                {"sizes", c.sizes},
                {"repetitions", c.repetitions},
                {"seed", c.seed},
                {"em_threshold", c.em.convergence_rms_threshold},
                {"em_max_iterations", c.em.max_iterations},
                {"em_init", c.em.init == InitMode::Uniform ? "uniform" : "dirichlet"},
                {"algorithms", algorithms},
                {"map_prior", c.map_prior == MapPrior::Uniform ? "uniform" : "truth"}};
}

std::string sigma_tag(double sigma) {
    auto text = number(sigma);
    std::replace(text.begin(), text.end(), '.', 'p');
    return text;
}

std::vector<std::vector<double>> map_priors(const BenchNetwork& truth, MapPrior mode) {
    const auto& s = truth.network.structure();
    if (mode == MapPrior::TruthMarginal) return node_marginals(truth.network, uninformative_evidence(s));
    std::vector<std::vector<double>> priors(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        priors[i].assign(static_cast<std::size_t>(s.cardinality(i)), 1.0 / s.cardinality(i));
    return priors;
}

}  // namespace

NetworkSpec simple_network_spec() {
    NetworkSpec spec;
    for (int i = 1; i <= 7; ++i) spec.nodes.push_back({"X" + std::to_string(i), 2});
    spec.arcs = {{"X1", "X7"}, {"X2", "X7"}};
    return spec;
}

void check_complex_topology(const NetworkSpec& spec) {
    Structure s(spec);
    if (s.size() != 8) throw Error(ErrorCode::ConfigError, "complex network must have 8 nodes");
    if (spec.arcs.size() != 10) throw Error(ErrorCode::ConfigError, "complex network must have 10 arcs");
    for (const auto& n : spec.nodes)
        if (n.cardinality < 2 || n.cardinality > 4)
            throw Error(ErrorCode::ConfigError, "complex network cardinalities must lie in [2, 4]");
    if (s.degrees_of_freedom() != 125)
        throw Error(ErrorCode::ConfigError,
                    "complex network must have 125 free parameters, found " + std::to_string(s.degrees_of_freedom()));
}

NetworkSpec complex_network_spec() {
    NetworkSpec spec;
    try {
        spec = parse_document(detail::kComplexNetworkDocument).spec;
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, std::string("frozen complex topology is unreadable: ") + e.what());
    }
    check_complex_topology(spec);
    return spec;
}

BenchNetwork make_network(const NetworkSpec& spec, double sigma, Rng& rng) {
    auto structure = std::make_shared<const Structure>(spec);
    auto cpts = random_cpts(*structure, rng);
    auto sensors = SensorModel::evenly_spaced(*structure, sigma);
    return {Network(std::move(structure), std::move(cpts)), std::move(sensors)};
}

BenchNetwork make_simple_network(Rng& rng, double sigma) {
    auto bench = make_network(simple_network_spec(), sigma, rng);
    if (degrees_of_freedom(bench.network) != 10)
        throw Error(ErrorCode::ConfigError, "simple network must have 10 free parameters");
    return bench;
}

BenchNetwork make_complex_network(Rng& rng, double sigma) { return make_network(complex_network_spec(), sigma, rng); }

SynthesizedData synthesize_dataset(const Network& net, const SensorModel& sensors, std::size_t experiments, Rng& rng) {
    if (experiments < 1) throw Error(ErrorCode::InvalidArgument, "dataset size must be >= 1");
    sensors.check_compatible(net.structure());
    SynthesizedData out{Dataset(net.size()), DiscretizedDataset(net.size())};
    out.readings.reserve(experiments);
    out.truth.reserve(experiments);
    std::vector<double> reading(net.size());
    for (std::size_t k = 0; k < experiments; ++k) {
        const auto values = ancestral_sample(net, rng);
        for (std::size_t i = 0; i < net.size(); ++i) reading[i] = sample_reading(sensors, i, values[i], rng);
        out.truth.push_back(values);
        out.readings.push_back(reading);
    }
    return out;
}

double rms_error(const Network& learned, const Network& truth) {
    if (!(learned.spec() == truth.spec())) throw Error(ErrorCode::SpecMismatch, "networks have different specs");
    return rms_difference(learned.cpts(), truth.cpts());
}

std::string_view to_string(Algorithm algorithm) { return algorithm == Algorithm::EM ? "EM" : "Discrete"; }

Algorithm parse_algorithm(std::string_view text) {
    if (text == "EM" || text == "em") return Algorithm::EM;
    if (text == "Discrete" || text == "discrete") return Algorithm::Discrete;
    throw Error(ErrorCode::ParseError, "unknown algorithm '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
    if (sizes.empty()) throw Error(ErrorCode::ConfigError, "at least one database size is required");
    for (auto k : sizes)
        if (k < 1) throw Error(ErrorCode::ConfigError, "database sizes must be >= 1");
    if (repetitions < 1) throw Error(ErrorCode::ConfigError, "repetitions must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::ConfigError, "sigma must be finite and > 0");
    if (algorithms.empty()) throw Error(ErrorCode::ConfigError, "no algorithm selected");
    try {
        em.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
}

std::string network_label(std::string_view network) {
    if (network == "simple" || network == "complex") return std::string(network);
    return std::filesystem::path(network).stem().string();
}

NetworkSpec resolve_network(std::string_view network) {
    if (network == "simple") return simple_network_spec();
    if (network == "complex") return complex_network_spec();
    return read_document(std::filesystem::path(network)).spec;
}

std::vector<TrialResult> run_suite(const ExperimentConfig& config) {
    config.validate();
    const auto structure = std::make_shared<const Structure>(resolve_network(config.network));
    const auto label = network_label(config.network);

    std::map<std::tuple<int, std::size_t, int>, TrialResult> done;
    std::ofstream results_out;
    std::filesystem::path results_path;
    std::filesystem::path trace_dir;
    if (config.output_dir) {
        const auto& dir = *config.output_dir;
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
        trace_dir = dir / "traces";
        if (config.write_traces) std::filesystem::create_directories(trace_dir, ec);

        const auto config_path = dir / "config.json";
        const auto wanted = config_json(config);
        if (std::filesystem::exists(config_path)) {
            std::ifstream in(config_path);
            Json existing;
            try {
                existing = Json::parse(in);
            } catch (const nlohmann::json::exception&) {
                throw Error(ErrorCode::ConfigError, config_path.string() + " is unreadable");
            }
            if (existing != wanted)
                throw Error(ErrorCode::ConfigError,
                            dir.string() + " holds results for a different configuration; use a fresh output directory");
        } else {
            std::ofstream out(config_path);
            if (!out) throw Error(ErrorCode::IoError, "cannot write " + config_path.string());
            out << wanted.dump(2) << '\n';
        }

        results_path = dir / "results.csv";
        if (std::filesystem::exists(results_path)) {
            for (auto& r : read_results(results_path, true))
                if (r.ok() && r.network == label && r.sigma == config.sigma) done.emplace(result_key(r), r);
            // rewrite without failed or truncated rows before appending
            std::vector<TrialResult> kept;
            for (const auto& [key, r] : done) kept.push_back(r);
            write_results_csv(results_path, kept);
        } else {
            write_results_csv(results_path, {});
        }
        results_out.open(results_path, std::ios::app);
        if (!results_out) throw Error(ErrorCode::IoError, "cannot append to " + results_path.string());
    }

    struct Task {
        int repetition;
        std::size_t size;
    };
    std::vector<Task> tasks;
    for (int rep = 0; rep < config.repetitions; ++rep)
        for (auto size : config.sizes) {
            bool pending = false;
            for (auto algo : config.algorithms)
                if (!done.count({rep, size, static_cast<int>(algo)})) pending = true;
            if (pending) tasks.push_back({rep, size});
        }

    std::mutex mutex;
    std::vector<TrialResult> fresh;
    std::vector<std::string> violations;
    std::atomic<std::size_t> next{0};

    auto record = [&](const TrialResult& r) {
        std::lock_guard lock(mutex);
        fresh.push_back(r);
        if (results_out.is_open()) results_out << results_line(r) << '\n' << std::flush;
    };

    auto run_task = [&](const Task& task) {
        Rng truth_rng(derive_seed(config.seed, {kTruthStream, static_cast<std::uint64_t>(task.repetition)}));
        Rng data_rng(derive_seed(config.seed, {kDataStream, static_cast<std::uint64_t>(task.repetition), task.size}));
        auto truth = make_network(structure->spec(), config.sigma, truth_rng);
        auto data = synthesize_dataset(truth.network, truth.sensors, task.size, data_rng);

        for (auto algo : config.algorithms) {
            if (done.count({task.repetition, task.size, static_cast<int>(algo)})) continue;
            TrialResult r;
            r.network = label;
            r.sigma = config.sigma;
            r.algorithm = algo;
            r.size = task.size;
            r.repetition = task.repetition;
            const auto start = std::chrono::steady_clock::now();
            try {
                if (algo == Algorithm::EM) {
                    Rng init_rng(derive_seed(config.seed,
                                             {kInitStream, static_cast<std::uint64_t>(task.repetition), task.size}));
                    auto em = run_em(structure, truth.sensors, data.readings, config.em, init_rng);
                    r.rms = rms_error(em.network, truth.network);
                    r.log_likelihood = em.trace.final_log_likelihood;
                    r.iterations = static_cast<int>(em.trace.iterations.size());
                    r.status = std::string(to_string(em.trace.status));
                    if (!em.trace.is_monotone()) {
                        std::lock_guard lock(mutex);
                        violations.push_back(label + " K=" + std::to_string(task.size) +
                                             " rep=" + std::to_string(task.repetition));
                    }
                    if (config.output_dir && config.write_traces)
                        write_trace_csv(trace_dir / (label + "_sigma" + sigma_tag(config.sigma) + "_K" +
                                                     std::to_string(task.size) + "_rep" +
                                                     std::to_string(task.repetition) + ".csv"),
                                        em.trace);
                } else {
                    auto priors = map_priors(truth, config.map_prior);
                    auto labels = discretize(truth.sensors, priors, data.readings);
                    auto learned = count_mle(labels, structure);
                    r.rms = rms_error(learned, truth.network);
                    r.log_likelihood = observed_loglik(learned, truth.sensors, data.readings);
                    r.iterations = 0;
                    r.status = "closed-form";
                }
            } catch (const std::exception& e) {
                r.status = "failed";
                r.error = e.what();
            }
            r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            record(r);
        }
    };

    unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, tasks.size()));
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) run_task(tasks[t]);
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    std::vector<TrialResult> all;
    for (const auto& [key, r] : done) all.push_back(r);
    all.insert(all.end(), fresh.begin(), fresh.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return result_key(a) < result_key(b); });

    if (config.output_dir) {
        results_out.close();
        write_results_csv(results_path, all);
        std::vector<TrialResult> ok;
        std::copy_if(all.begin(), all.end(), std::back_inserter(ok), [](const auto& r) { return r.ok(); });
        if (!ok.empty()) {
            const auto rows = summarize(ok);
            write_summary_csv(*config.output_dir / "summary.csv", rows);
            write_summary_json(*config.output_dir / "summary.json", rows);
        }
    }

    if (!violations.empty()) {
        std::string list;
        for (const auto& v : violations) list += (list.empty() ? "" : ", ") + v;
        throw Error(ErrorCode::MonotonicityViolation, "EM log-likelihood decreased in: " + list);
    }
    return all;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results) {
    if (results.empty()) throw Error(ErrorCode::InvalidArgument, "no results to summarize");
    using Key = std::tuple<std::string, double, std::size_t, int>;
    std::map<Key, std::vector<double>> groups;
    for (const auto& r : results)
        if (r.ok()) groups[{r.network, r.sigma, r.size, static_cast<int>(r.algorithm)}].push_back(r.rms);

    std::vector<SummaryRow> rows;
    for (const auto& [key, values] : groups) {
        SummaryRow row;
        row.network = std::get<0>(key);
        row.sigma = std::get<1>(key);
        row.size = std::get<2>(key);
        row.algorithm = static_cast<Algorithm>(std::get<3>(key));
        row.trials = values.size();
        row.median = quantile(values, 0.5);
        row.q1 = quantile(values, 0.25);
        row.q3 = quantile(values, 0.75);
        rows.push_back(row);
    }
    for (auto& row : rows) {
        const SummaryRow* em = nullptr;
        const SummaryRow* discrete = nullptr;
        for (const auto& other : rows) {
            if (other.network != row.network || other.sigma != row.sigma || other.size != row.size) continue;
            (other.algorithm == Algorithm::EM ? em : discrete) = &other;
        }
        if (em && discrete && discrete->median > 0.0)
            row.reduction_percent = (1.0 - em->median / discrete->median) * 100.0;
    }
    return rows;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<TrialResult>& results) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << kResultsHeader << '\n';
        for (const auto& r : results) out << results_line(r) << '\n';
        if (!out) throw Error(ErrorCode::IoError, "failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot replace " + path.string() + ": " + ec.message());
}

std::vector<TrialResult> read_results_csv(const std::filesystem::path& path) { return read_results(path, false); }

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << "network,sigma,size,algorithm,trials,median,q1,q3,reduction_percent\n";
    for (const auto& r : rows) {
        out << r.network << ',' << number(r.sigma) << ',' << r.size << ',' << to_string(r.algorithm) << ','
            << r.trials << ',' << number(r.median) << ',' << number(r.q1) << ',' << number(r.q3) << ','
            << (r.reduction_percent ? number(*r.reduction_percent) : "") << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

void write_summary_json(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
    Json cells = Json::array();
    for (const auto& r : rows) {
        Json cell{{"network", r.network},
                  {"sigma", r.sigma},
                  {"size", r.size},
                  {"algorithm", std::string(to_string(r.algorithm))},
                  {"trials", r.trials},
                  {"median", r.median},
                  {"q1", r.q1},
                  {"q3", r.q3}};
        cell["reduction_percent"] = r.reduction_percent ? Json(*r.reduction_percent) : Json(nullptr);
        cells.push_back(std::move(cell));
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << Json{{"cells", cells}}.dump(2) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const EmTrace& trace) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    // row t: log-likelihood of the parameters after t M-steps and the RMS
    // change made by step t (empty for the initial parameters)
    out << "iteration,log_likelihood,rms_delta\n";
    for (std::size_t t = 0; t <= trace.iterations.size(); ++t) {
        const double ll = t < trace.iterations.size() ? trace.iterations[t].log_likelihood : trace.final_log_likelihood;
        out << t << ',' << number(ll) << ',';
        if (t > 0) out << number(trace.iterations[t - 1].rms_delta);
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace affem
