#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "affem/baseline.hpp"
#include "affem/em.hpp"
#include "affem/error.hpp"
#include "affem/inference.hpp"
#include "affem/serialize.hpp"
#include "affem/simbench.hpp"
#include "affem/structure_search.hpp"

namespace py = pybind11;
using namespace affem;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

/// Network with the sensor model that observes it.
struct Model {
    Network network;
    SensorModel sensors;

    const Structure& structure() const { return network.structure(); }
};

std::vector<std::string> names(const Structure& s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size(); ++i) out.push_back(s.name(i));
    return out;
}

std::vector<int> cardinalities(const Structure& s) {
    std::vector<int> out;
    for (std::size_t i = 0; i < s.size(); ++i) out.push_back(s.cardinality(i));
    return out;
}

template <class T>
RowTable<T> to_table(const py::array_t<T, py::array::c_style | py::array::forcecast>& a, std::size_t columns) {
    if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(1)) != columns)
        throw Error(ErrorCode::EvidenceShapeMismatch,
                    "expected an array of shape (experiments, " + std::to_string(columns) + ")");
    return RowTable<T>(columns, std::vector<T>(a.data(), a.data() + a.size()));
}

template <class T>
py::array_t<T> to_array(const RowTable<T>& t) {
    py::array_t<T> out({t.size(), t.columns()});
    std::copy(t.values().begin(), t.values().end(), out.mutable_data());
    return out;
}

Model template_model(const std::string& net, std::uint64_t seed, double sigma) {
    Rng rng(seed);
    auto bench = make_network(resolve_network(net), sigma, rng);
    return {std::move(bench.network), std::move(bench.sensors)};
}

Model model_from_document(const std::string& text) {
    auto doc = parse_document(text);
    if (!doc.sensors) throw Error(ErrorCode::ParseError, "document has no sensor section");
    return {network_from_document(doc), *doc.sensors};
}

py::list cpt_arrays(const Model& m) {
    py::list out;
    for (const auto& cpt : m.network.cpts()) {
        const auto r = static_cast<std::size_t>(cpt.cardinality);
        Array a({cpt.table.size() / r, r});
        std::copy(cpt.table.begin(), cpt.table.end(), a.mutable_data());
        out.append(a);
    }
    return out;
}

py::tuple synthesize(const Model& m, std::size_t experiments, std::uint64_t seed) {
    Rng rng(seed);
    auto data = synthesize_dataset(m.network, m.sensors, experiments, rng);
    return py::make_tuple(to_array(data.readings), to_array(data.truth));
}

py::tuple learn_em(const Model& m, const Array& readings, int max_iters, double tol, std::uint64_t seed,
                   const std::string& init) {
    EmConfig config;
    config.max_iterations = max_iters;
    config.convergence_rms_threshold = tol;
    config.init = init == "uniform" ? InitMode::Uniform : InitMode::RandomDirichlet;
    const auto data = to_table(readings, m.structure().size());
    Rng rng(seed);
    EmResult result = [&] {
        py::gil_scoped_release release;
        return run_em(m.network.structure_ptr(), m.sensors, data, config, rng);
    }();
    py::dict trace;
    std::vector<double> loglik, delta;
    for (const auto& it : result.trace.iterations) {
        loglik.push_back(it.log_likelihood);
        delta.push_back(it.rms_delta);
    }
    trace["log_likelihood"] = loglik;
    trace["rms_delta"] = delta;
    trace["final_log_likelihood"] = result.trace.final_log_likelihood;
    trace["status"] = std::string(to_string(result.trace.status));
    return py::make_tuple(Model{std::move(result.network), m.sensors}, trace);
}

std::vector<std::vector<double>> priors_for(const Model& m, const std::optional<Model>& truth) {
    if (truth) return node_marginals(truth->network, uninformative_evidence(truth->structure()));
    std::vector<std::vector<double>> priors;
    for (int r : cardinalities(m.structure())) priors.emplace_back(r, 1.0 / r);
    return priors;
}

IntArray discretize_readings(const Model& m, const Array& readings, const std::optional<Model>& prior_from) {
    return to_array(discretize(m.sensors, priors_for(m, prior_from), to_table(readings, m.structure().size())));
}

Model learn_discrete(const Model& m, const Array& readings, const std::optional<Model>& prior_from) {
    auto labels = discretize(m.sensors, priors_for(m, prior_from), to_table(readings, m.structure().size()));
    return {count_mle(labels, m.network.structure_ptr()), m.sensors};
}

Array posterior(const Model& m, const py::dict& readings, const std::vector<std::string>& targets) {
    const auto& s = m.structure();
    std::vector<std::optional<double>> values(s.size());
    for (const auto& [key, value] : readings) values[s.index_of(py::cast<std::string>(key))] = py::cast<double>(value);
    std::vector<std::size_t> idx;
    for (const auto& t : targets) idx.push_back(s.index_of(t));
    auto p = query(m.network, m.sensors, values, idx);
    std::vector<py::ssize_t> shape;
    for (auto i : idx) shape.push_back(s.cardinality(i));
    Array out(shape);
    std::copy(p.begin(), p.end(), out.mutable_data());
    return out;
}

std::vector<std::pair<std::string, std::string>> k2(const Model& m, const IntArray& values,
                                                    const std::optional<std::vector<std::string>>& order,
                                                    std::size_t max_parents) {
    const auto& s = m.structure();
    NodeOrder node_order;
    if (order)
        for (const auto& name : *order) node_order.push_back(s.index_of(name));
    else
        node_order = s.topo_order();
    auto found = k2_search(to_table(values, s.size()), m.network.spec().nodes, node_order, max_parents);
    std::vector<std::pair<std::string, std::string>> arcs;
    for (const auto& a : found.arcs) arcs.emplace_back(a.parent, a.child);
    return arcs;
}

py::dict result_dict(const TrialResult& r) {
    py::dict d;
    d["network"] = r.network;
    d["sigma"] = r.sigma;
    d["algorithm"] = std::string(to_string(r.algorithm));
    d["size"] = r.size;
    d["repetition"] = r.repetition;
    d["rms"] = r.rms;
    d["log_likelihood"] = r.log_likelihood;
    d["iterations"] = r.iterations;
    d["status"] = r.status;
    d["error"] = r.error;
    return d;
}

py::tuple bench(const std::string& net, double sigma, const std::vector<std::size_t>& sizes, int reps,
                std::uint64_t seed, const std::string& algo, std::optional<std::string> out, unsigned threads,
                const std::string& map_prior, int max_iters, double tol) {
    ExperimentConfig c;
    c.network = net;
    c.sigma = sigma;
    c.sizes = sizes;
    c.repetitions = reps;
    c.seed = seed;
    c.em.max_iterations = max_iters;
    c.em.convergence_rms_threshold = tol;
    c.algorithms = algo == "both" ? std::vector<Algorithm>{Algorithm::EM, Algorithm::Discrete}
                                  : std::vector<Algorithm>{parse_algorithm(algo)};
    c.map_prior = map_prior == "uniform" ? MapPrior::Uniform : MapPrior::TruthMarginal;
    if (out) c.output_dir = *out;
    c.threads = threads;
    c.write_traces = out.has_value();
    std::vector<TrialResult> results;
    {
        py::gil_scoped_release release;
        results = run_suite(c);
    }
    py::list trials, summary;
    std::vector<TrialResult> ok;
    for (const auto& r : results) {
        trials.append(result_dict(r));
        if (r.ok()) ok.push_back(r);
    }
    if (!ok.empty())
        for (const auto& row : summarize(ok)) {
            py::dict d;
            d["network"] = row.network;
            d["sigma"] = row.sigma;
            d["size"] = row.size;
            d["algorithm"] = std::string(to_string(row.algorithm));
            d["trials"] = row.trials;
            d["median"] = row.median;
            d["q1"] = row.q1;
            d["q3"] = row.q3;
            d["reduction_percent"] = row.reduction_percent;
            summary.append(d);
        }
    return py::make_tuple(trials, summary);
}

}  // namespace

PYBIND11_MODULE(_affem, m) {
    m.doc() = "EM and discretize-then-count parameter learning for Bayesian networks observed through noisy sensors";

    py::register_exception<Error>(m, "AffemError", PyExc_ValueError);

    py::class_<Model>(m, "Model")
        .def_static("template", &template_model, py::arg("network") = "simple", py::arg("seed") = 1,
                    py::arg("sigma") = 1.0, "Dirichlet(1) ground truth on a benchmark topology or document")
        .def_static("from_document", &model_from_document, py::arg("text"))
        .def("to_document", [](const Model& self) { return to_document(self.network, &self.sensors); })
        .def_property_readonly("names", [](const Model& self) { return names(self.structure()); })
        .def_property_readonly("cardinalities", [](const Model& self) { return cardinalities(self.structure()); })
        .def_property_readonly("arcs",
                               [](const Model& self) {
                                   std::vector<std::pair<std::string, std::string>> arcs;
                                   for (const auto& a : self.network.spec().arcs) arcs.emplace_back(a.parent, a.child);
                                   return arcs;
                               })
        .def("cpts", &cpt_arrays, "one (parent rows, values) array per node")
        .def("__repr__", [](const Model& self) {
            return "<affem.Model nodes=" + std::to_string(self.structure().size()) +
                   " arcs=" + std::to_string(self.network.spec().arcs.size()) + ">";
        });

    m.def("synthesize", &synthesize, py::arg("model"), py::arg("experiments"), py::arg("seed") = 1,
          "(readings, values) drawn by ancestral sampling");
    m.def("learn_em", &learn_em, py::arg("model"), py::arg("readings"), py::arg("max_iters") = 100,
          py::arg("tol") = 1e-3, py::arg("seed") = 1, py::arg("init") = "dirichlet",
          "(learned model, trace dict)");
    m.def("discretize", &discretize_readings, py::arg("model"), py::arg("readings"), py::arg("prior_from") = py::none(),
          "MAP labels; prior from the marginals of `prior_from`, uniform otherwise");
    m.def("learn_discrete", &learn_discrete, py::arg("model"), py::arg("readings"), py::arg("prior_from") = py::none());
    m.def(
        "rms_error", [](const Model& a, const Model& b) { return rms_error(a.network, b.network); }, py::arg("learned"),
        py::arg("truth"));
    m.def(
        "observed_loglik",
        [](const Model& model, const Array& readings) {
            return observed_loglik(model.network, model.sensors, to_table(readings, model.structure().size()));
        },
        py::arg("model"), py::arg("readings"));
    m.def("query", &posterior, py::arg("model"), py::arg("readings"), py::arg("targets"),
          "joint posterior over `targets` given {name: reading}");
    m.def("k2", &k2, py::arg("model"), py::arg("values"), py::arg("order") = py::none(), py::arg("max_parents") = 2,
          "K2 arcs over the nodes of `model`");
    m.def("bench", &bench, py::arg("network") = "simple", py::arg("sigma") = 1.0,
          py::arg("sizes") = std::vector<std::size_t>{300, 3000}, py::arg("reps") = 30, py::arg("seed") = 1,
          py::arg("algo") = "both", py::arg("out") = py::none(), py::arg("threads") = 0,
          py::arg("map_prior") = "truth", py::arg("max_iters") = 100, py::arg("tol") = 1e-3,
          "(trial dicts, summary dicts)");
}
