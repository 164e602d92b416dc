#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "affem/baseline.hpp"
#include "affem/em.hpp"
#include "affem/error.hpp"
#include "affem/inference.hpp"
#include "affem/serialize.hpp"
#include "affem/simbench.hpp"
#include "affem/structure_search.hpp"

namespace fs = std::filesystem;
using namespace affem;

namespace {

std::vector<std::string> node_names(const Structure& s) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < s.size(); ++i) names.push_back(s.name(i));
    return names;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, sep);)
        if (!item.empty()) parts.push_back(item);
    return parts;
}

std::vector<Algorithm> algorithms_for(const std::string& algo) {
    if (algo == "both") return {Algorithm::EM, Algorithm::Discrete};
    return {parse_algorithm(algo)};
}

/// Ground truth for `gen`: a template drawn from `rng`, or a document. A
/// document without CPTs gets Dirichlet(1) rows; one without sensors gets
/// means 5·v with `sigma`.
BenchNetwork load_truth(const std::string& net, double sigma, Rng& rng) {
    if (net == "simple" || net == "complex") return make_network(resolve_network(net), sigma, rng);
    auto doc = read_document(net);
    auto structure = std::make_shared<const Structure>(doc.spec);
    auto cpts = doc.cpts ? *doc.cpts : random_cpts(*structure, rng);
    auto sensors = doc.sensors ? *doc.sensors : SensorModel::evenly_spaced(*structure, sigma);
    return {Network(structure, std::move(cpts)), std::move(sensors)};
}

/// Spec and sensor model for learners; templates use means 5·v with `sigma`.
std::pair<NetworkSpec, SensorModel> load_model(const std::string& net, double sigma) {
    if (net == "simple" || net == "complex") {
        auto spec = resolve_network(net);
        Structure s(spec);
        return {spec, SensorModel::evenly_spaced(s, sigma)};
    }
    auto doc = read_document(net);
    if (doc.sensors) return {doc.spec, *doc.sensors};
    Structure s(doc.spec);
    return {doc.spec, SensorModel::evenly_spaced(s, sigma)};
}

void print_summary(const std::vector<SummaryRow>& rows) {
    std::printf("%-10s %6s %7s %-9s %6s %10s %10s %10s %10s\n", "network", "sigma", "size", "algorithm", "trials",
                "median", "q1", "q3", "reduction");
    for (const auto& r : rows) {
        std::printf("%-10s %6g %7zu %-9s %6zu %10.5f %10.5f %10.5f", r.network.c_str(), r.sigma, r.size,
                    std::string(to_string(r.algorithm)).c_str(), r.trials, r.median, r.q1, r.q3);
        if (r.reduction_percent)
            std::printf(" %9.1f%%\n", *r.reduction_percent);
        else
            std::printf(" %10s\n", "-");
    }
}

struct CommonOptions {
    std::string net = "simple";
    double sigma = 1.0;
    std::uint64_t seed = 1;
    std::string out;
    int max_iters = 100;
    double tol = 1e-3;
    std::string algo = "both";
};

EmConfig em_config(const CommonOptions& o, const std::string& init) {
    EmConfig c;
    c.max_iterations = o.max_iters;
    c.convergence_rms_threshold = o.tol;
    c.init = init == "uniform" ? InitMode::Uniform : InitMode::RandomDirichlet;
    return c;
}

int run_bench(const CommonOptions& o, const std::vector<std::size_t>& sizes, int reps, unsigned threads,
              const std::string& map_prior, const std::string& init, bool traces) {
    ExperimentConfig c;
    c.network = o.net;
    c.sigma = o.sigma;
    c.sizes = sizes;
    c.repetitions = reps;
    c.seed = o.seed;
    c.em = em_config(o, init);
    c.algorithms = algorithms_for(o.algo);
    c.map_prior = map_prior == "uniform" ? MapPrior::Uniform : MapPrior::TruthMarginal;
    if (!o.out.empty()) c.output_dir = fs::path(o.out);
    c.threads = threads;
    c.write_traces = traces;

    auto results = run_suite(c);
    std::size_t failed = 0;
    std::vector<TrialResult> ok;
    for (const auto& r : results) {
        if (r.ok())
            ok.push_back(r);
        else {
            ++failed;
            std::fprintf(stderr, "trial failed: %s K=%zu rep=%d: %s\n", std::string(to_string(r.algorithm)).c_str(),
                         r.size, r.repetition, r.error.c_str());
        }
    }
    if (!ok.empty()) print_summary(summarize(ok));
    if (!o.out.empty()) std::printf("results written to %s\n", o.out.c_str());
    return failed ? 2 : 0;
}

int run_gen(const CommonOptions& o, std::size_t size) {
    if (o.out.empty()) throw Error(ErrorCode::ConfigError, "gen needs --out");
    Rng truth_rng(derive_seed(o.seed, {1}));
    Rng data_rng(derive_seed(o.seed, {2, size}));
    auto truth = load_truth(o.net, o.sigma, truth_rng);
    auto data = synthesize_dataset(truth.network, truth.sensors, size, data_rng);
    const fs::path dir(o.out);
    fs::create_directories(dir);
    const auto names = node_names(truth.network.structure());
    write_document(dir / "truth.json", {truth.network.spec(), truth.network.cpts(), truth.sensors});
    write_csv(dir / "readings.csv", names, data.readings);
    write_csv(dir / "values.csv", names, data.truth);
    std::printf("wrote %zu experiments for %zu nodes to %s\n", size, names.size(), dir.c_str());
    return 0;
}

int run_learn(const CommonOptions& o, const std::string& data_path, const std::string& truth_path,
              const std::string& init, const std::string& map_prior) {
    if (o.out.empty()) throw Error(ErrorCode::ConfigError, "learn needs --out");
    auto [spec, sensors] = load_model(o.net, o.sigma);
    auto structure = std::make_shared<const Structure>(spec);
    const auto names = node_names(*structure);
    auto data = read_dataset_csv(data_path, names);
    std::optional<Network> truth;
    if (!truth_path.empty()) truth = network_from_document(read_document(truth_path));

    const fs::path dir(o.out);
    fs::create_directories(dir);
    for (auto algo : algorithms_for(o.algo)) {
        std::optional<Network> learned;
        if (algo == Algorithm::EM) {
            Rng rng(derive_seed(o.seed, {3}));
            auto result = run_em(structure, sensors, data, em_config(o, init), rng);
            write_trace_csv(dir / "em_trace.csv", result.trace);
            std::printf("EM: %zu iterations (%s), log-likelihood %.6f\n", result.trace.iterations.size(),
                        std::string(to_string(result.trace.status)).c_str(), result.trace.final_log_likelihood);
            learned = std::move(result.network);
        } else {
            std::vector<std::vector<double>> priors;
            if (map_prior == "truth") {
                if (!truth) throw Error(ErrorCode::ConfigError, "--map-prior truth needs --truth");
                priors = node_marginals(*truth, uninformative_evidence(truth->structure()));
            } else {
                for (std::size_t i = 0; i < structure->size(); ++i)
                    priors.emplace_back(structure->cardinality(i), 1.0 / structure->cardinality(i));
            }
            learned = count_mle(discretize(sensors, priors, data), structure);
            std::printf("Discrete: log-likelihood %.6f\n", observed_loglik(*learned, sensors, data));
        }
        const auto file = dir / (algo == Algorithm::EM ? "em.json" : "discrete.json");
        write_document(file, {spec, learned->cpts(), sensors});
        if (truth) std::printf("  RMS error vs truth: %.6f\n", rms_error(*learned, *truth));
        std::printf("  model written to %s\n", file.c_str());
    }
    return 0;
}

int run_query(const std::string& model_path, const std::string& targets_text,
              const std::vector<std::string>& readings_text) {
    auto doc = read_document(model_path);
    if (!doc.sensors) throw Error(ErrorCode::ConfigError, model_path + " has no sensor section");
    auto net = network_from_document(doc);
    const auto& s = net.structure();

    std::vector<std::optional<double>> readings(s.size());
    for (const auto& item : readings_text) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "reading '" + item + "' is not NAME=VALUE");
        const auto node = s.index_of(item.substr(0, eq));
        try {
            readings[node] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "reading '" + item + "' has no numeric value");
        }
    }
    std::vector<std::size_t> targets;
    for (const auto& name : split(targets_text, ',')) targets.push_back(s.index_of(name));
    if (targets.empty()) throw Error(ErrorCode::ConfigError, "query needs at least one target");

    auto posterior = query(net, *doc.sensors, readings, targets);
    for (auto t : targets) std::printf("%s,", s.name(t).c_str());
    std::printf("probability\n");
    std::vector<int> values(targets.size(), 0);
    for (double p : posterior) {
        for (int v : values) std::printf("%d,", v);
        std::printf("%.10g\n", p);
        for (std::size_t j = targets.size(); j-- > 0;) {
            if (++values[j] < s.cardinality(targets[j])) break;
            values[j] = 0;
        }
    }
    return 0;
}

int run_structure(const CommonOptions& o, const std::string& data_path, bool discrete, const std::string& order_text,
                  std::size_t max_parents) {
    auto [spec, sensors] = load_model(o.net, o.sigma);
    Structure s(spec);
    const auto names = node_names(s);
    DiscretizedDataset values;
    if (discrete) {
        values = read_discretized_csv(data_path, names);
    } else {
        std::vector<std::vector<double>> priors;
        for (std::size_t i = 0; i < s.size(); ++i) priors.emplace_back(s.cardinality(i), 1.0 / s.cardinality(i));
        values = discretize(sensors, priors, read_dataset_csv(data_path, names));
    }
    NodeOrder order;
    if (order_text.empty()) {
        order = s.topo_order();
    } else {
        for (const auto& name : split(order_text, ',')) order.push_back(s.index_of(name));
    }
    auto found = k2_search(values, spec.nodes, order, max_parents);
    if (o.out.empty()) {
        std::cout << to_document(found) << '\n';
    } else {
        write_document(o.out, {found, std::nullopt, std::nullopt});
        std::printf("%zu arcs written to %s\n", found.arcs.size(), o.out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter learning for discrete Bayesian networks observed through noisy sensors"};
    app.require_subcommand(1);
    CommonOptions o;

    auto add_net = [&](CLI::App* cmd) {
        cmd->add_option("--net", o.net, "simple, complex, or a network document")->capture_default_str();
        cmd->add_option("--sigma", o.sigma, "sensor standard deviation for templates")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
    };
    auto add_em = [&](CLI::App* cmd) {
        cmd->add_option("--max-iters", o.max_iters, "EM iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--tol", o.tol, "EM RMS parameter-change threshold")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
    };
    const std::vector<std::string> algos{"em", "discrete", "both"};

    std::vector<std::size_t> sizes{300, 3000};
    int reps = 30;
    unsigned threads = 0;
    std::string map_prior = "truth", init = "dirichlet";
    bool no_traces = false;
    auto* bench = app.add_subcommand("bench", "run the EM vs Discrete comparison");
    add_net(bench);
    add_em(bench);
    bench->add_option("--sizes", sizes, "database sizes")->delimiter(',')->capture_default_str();
    bench->add_option("--reps", reps, "repetitions")->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--seed", o.seed, "master seed")->capture_default_str();
    bench->add_option("--algo", o.algo, "learners to run")->check(CLI::IsMember(algos))->capture_default_str();
    bench->add_option("--out", o.out, "output directory (enables resume)");
    bench->add_option("--threads", threads, "worker threads, 0 = all cores")->capture_default_str();
    bench->add_option("--map-prior", map_prior, "MAP prior of the Discrete learner")
        ->check(CLI::IsMember({"truth", "uniform"}))
        ->capture_default_str();
    bench->add_option("--init", init, "EM initialization")
        ->check(CLI::IsMember({"dirichlet", "uniform"}))
        ->capture_default_str();
    bench->add_flag("--no-traces", no_traces, "skip per-trial trace files");

    std::size_t gen_size = 300;
    auto* gen = app.add_subcommand("gen", "write a ground-truth network and a synthetic dataset");
    add_net(gen);
    gen->add_option("--sizes", gen_size, "number of experiments")->capture_default_str()->check(CLI::PositiveNumber);
    gen->add_option("--seed", o.seed, "seed")->capture_default_str();
    gen->add_option("--out", o.out, "output directory")->required();

    std::string data_path, truth_path;
    std::string learn_prior = "uniform";
    auto* learn = app.add_subcommand("learn", "learn CPTs from one dataset of sensor readings");
    add_net(learn);
    add_em(learn);
    learn->add_option("--data", data_path, "readings CSV")->required()->check(CLI::ExistingFile);
    learn->add_option("--truth", truth_path, "ground-truth document for RMS reporting")->check(CLI::ExistingFile);
    learn->add_option("--algo", o.algo, "learners to run")->check(CLI::IsMember(algos))->capture_default_str();
    learn->add_option("--seed", o.seed, "EM initialization seed")->capture_default_str();
    learn->add_option("--out", o.out, "output directory")->required();
    learn->add_option("--init", init, "EM initialization")
        ->check(CLI::IsMember({"dirichlet", "uniform"}))
        ->capture_default_str();
    learn->add_option("--map-prior", learn_prior, "MAP prior of the Discrete learner")
        ->check(CLI::IsMember({"truth", "uniform"}))
        ->capture_default_str();

    std::string model_path, targets;
    std::vector<std::string> readings;
    auto* q = app.add_subcommand("query", "posterior over target nodes given sensor readings");
    q->add_option("--model", model_path, "network document with CPTs and sensors")->required()->check(CLI::ExistingFile);
    q->add_option("--target", targets, "comma-separated target nodes")->required();
    q->add_option("--reading", readings, "NAME=VALUE sensor reading (repeatable)");

    bool discrete = false;
    std::string order;
    std::size_t max_parents = 2;
    auto* st = app.add_subcommand("structure", "K2 structure search on MAP-discretized data");
    add_net(st);
    st->add_option("--data", data_path, "readings CSV (or values CSV with --discrete)")->required()->check(CLI::ExistingFile);
    st->add_flag("--discrete", discrete, "data already holds discrete values");
    st->add_option("--order", order, "comma-separated node order (default: topological order of --net)");
    st->add_option("--max-parents", max_parents, "parent limit per node")->capture_default_str();
    st->add_option("--out", o.out, "output document (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bench) return run_bench(o, sizes, reps, threads, map_prior, init, !no_traces);
        if (*gen) return run_gen(o, gen_size);
        if (*learn) return run_learn(o, data_path, truth_path, init, learn_prior);
        if (*q) return run_query(model_path, targets, readings);
        if (*st) return run_structure(o, data_path, discrete, order, max_parents);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
