#include "affem/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "affem/error.hpp"
#include "affem/sensor.hpp"

namespace affem {

namespace {

constexpr double kLogFloor = 1e-300;

/// For every entry of the table over `vars` (first var most significant),
/// the index of the matching entry in the table over `target`.
std::vector<std::uint32_t> project(const Structure& s, const std::vector<std::size_t>& vars,
                                   const std::vector<std::size_t>& target) {
    std::size_t size = 1;
    for (auto v : vars) size *= static_cast<std::size_t>(s.cardinality(v));

    // weight of each clique variable inside the target index (0 if absent)
    std::vector<std::size_t> weight(vars.size(), 0);
    for (std::size_t j = 0; j < vars.size(); ++j) {
        std::size_t w = 1;
        for (std::size_t t = target.size(); t > 0; --t) {
            if (target[t - 1] == vars[j]) {
                weight[j] = w;
                break;
            }
            w *= static_cast<std::size_t>(s.cardinality(target[t - 1]));
        }
    }

    std::vector<std::uint32_t> map(size);
    std::vector<int> digits(vars.size(), 0);
    std::size_t index = 0;
    for (std::size_t e = 0; e < size; ++e) {
        map[e] = static_cast<std::uint32_t>(index);
        for (std::size_t j = vars.size(); j > 0; --j) {
            auto& d = digits[j - 1];
            index += weight[j - 1];
            if (++d < s.cardinality(vars[j - 1])) break;
            index -= weight[j - 1] * static_cast<std::size_t>(d);
            d = 0;
        }
    }
    return map;
}

std::vector<std::size_t> family_vars(const Structure& s, std::size_t node) {
    std::vector<std::size_t> vars = s.parents(node);
    vars.push_back(node);
    return vars;
}

/// Rescales each node's vector by its maximum, returning the total log scale.
double rescale_evidence(const Structure& s, std::vector<double>& flat) {
    double log_scale = 0.0;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto r = static_cast<std::size_t>(s.cardinality(i));
        const double top = *std::max_element(flat.begin() + offset, flat.begin() + offset + r);
        if (top <= 0.0)
            throw Error(ErrorCode::AllZeroLikelihood, "evidence for '" + s.name(i) + "' is zero for every value");
        for (std::size_t v = 0; v < r; ++v) flat[offset + v] /= top;
        log_scale += std::log(top);
        offset += r;
    }
    return log_scale;
}

FamilyTables enumerate_families(const Network& net, const std::vector<double>& flat, double log_scale) {
    const auto& s = net.structure();
    std::vector<std::size_t> offsets(s.size() + 1, 0);
    for (std::size_t i = 0; i < s.size(); ++i) offsets[i + 1] = offsets[i] + static_cast<std::size_t>(s.cardinality(i));

    FamilyTables out;
    out.tables.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        out.tables[i].assign(s.parent_configurations(i) * static_cast<std::size_t>(s.cardinality(i)), 0.0);

    std::vector<std::size_t> rows(s.size());
    double total = 0.0;
    for_each_assignment(s, [&](const Assignment& a) {
        double w = 1.0;
        for (std::size_t i = 0; i < s.size() && w != 0.0; ++i) {
            rows[i] = s.parent_configuration(i, a);
            w *= net.probability(i, a[i], rows[i]) * flat[offsets[i] + static_cast<std::size_t>(a[i])];
        }
        if (w == 0.0) return;
        total += w;
        for (std::size_t i = 0; i < s.size(); ++i)
            out.tables[i][rows[i] * static_cast<std::size_t>(s.cardinality(i)) + static_cast<std::size_t>(a[i])] += w;
    });
    if (total == 0.0) throw Error(ErrorCode::AllZeroLikelihood, "evidence annihilates every joint configuration");
    for (auto& table : out.tables)
        for (auto& v : table) v /= total;
    out.log_evidence = std::log(std::max(total, kLogFloor)) + log_scale;
    return out;
}

}  // namespace

Evidence uninformative_evidence(const Structure& structure) {
    Evidence ev(structure.size());
    for (std::size_t i = 0; i < structure.size(); ++i) ev[i].assign(static_cast<std::size_t>(structure.cardinality(i)), 1.0);
    return ev;
}

std::vector<double> flatten_evidence(const Structure& structure, const Evidence& evidence) {
    if (evidence.size() != structure.size())
        throw Error(ErrorCode::EvidenceShapeMismatch, std::to_string(evidence.size()) + " evidence vectors for " +
                                                          std::to_string(structure.size()) + " nodes");
    std::vector<double> flat;
    for (std::size_t i = 0; i < structure.size(); ++i) {
        if (evidence[i].size() != static_cast<std::size_t>(structure.cardinality(i)))
            throw Error(ErrorCode::EvidenceShapeMismatch,
                        "evidence for '" + structure.name(i) + "' has " + std::to_string(evidence[i].size()) +
                            " entries, expected " + std::to_string(structure.cardinality(i)));
        for (double v : evidence[i])
            if (!(v >= 0.0) || !std::isfinite(v))
                throw Error(ErrorCode::EvidenceShapeMismatch,
                            "evidence for '" + structure.name(i) + "' must be finite and non-negative");
        flat.insert(flat.end(), evidence[i].begin(), evidence[i].end());
    }
    return flat;
}

// ---------------------------------------------------------------------------
// JunctionTree

JunctionTree::JunctionTree(const Structure& s) {
    const std::size_t n = s.size();

    // moral graph
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (std::size_t c = 0; c < n; ++c) {
        const auto& ps = s.parents(c);
        for (std::size_t a = 0; a < ps.size(); ++a) {
            adj[ps[a]][c] = adj[c][ps[a]] = 1;
            for (std::size_t b = a + 1; b < ps.size(); ++b) adj[ps[a]][ps[b]] = adj[ps[b]][ps[a]] = 1;
        }
    }

    // greedy min-fill elimination; ties by clique weight, then index
    std::vector<char> alive(n, 1);
    std::vector<std::size_t> step_of(n, 0);
    std::vector<std::vector<std::size_t>> clique_vars;
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t best = n;
        std::size_t best_fill = 0;
        double best_weight = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            if (!alive[v]) continue;
            std::vector<std::size_t> nb;
            for (std::size_t u = 0; u < n; ++u)
                if (alive[u] && adj[v][u]) nb.push_back(u);
            std::size_t fill = 0;
            for (std::size_t a = 0; a < nb.size(); ++a)
                for (std::size_t b = a + 1; b < nb.size(); ++b)
                    if (!adj[nb[a]][nb[b]]) ++fill;
            double weight = s.cardinality(v);
            for (auto u : nb) weight *= s.cardinality(u);
            if (best == n || fill < best_fill || (fill == best_fill && weight < best_weight)) {
                best = v;
                best_fill = fill;
                best_weight = weight;
            }
        }
        std::vector<std::size_t> vars{best};
        for (std::size_t u = 0; u < n; ++u)
            if (alive[u] && adj[best][u]) vars.push_back(u);
        for (std::size_t a = 1; a < vars.size(); ++a)
            for (std::size_t b = a + 1; b < vars.size(); ++b) adj[vars[a]][vars[b]] = adj[vars[b]][vars[a]] = 1;
        alive[best] = 0;
        step_of[best] = t;
        clique_vars.push_back(vars);
    }

    cliques_.resize(n);
    std::vector<std::vector<std::size_t>> separators(n);
    for (std::size_t t = 0; t < n; ++t) {
        auto& clique = cliques_[t];
        clique.vars = clique_vars[t];
        std::sort(clique.vars.begin(), clique.vars.end());
        for (auto v : clique.vars) clique.size *= static_cast<std::size_t>(s.cardinality(v));
        if (t + 1 == n) break;
        auto& sep = separators[t];
        sep.assign(clique_vars[t].begin() + 1, clique_vars[t].end());
        std::sort(sep.begin(), sep.end());
        // the separator lives in the clique of its first-eliminated variable;
        // disconnected pieces hang off the root with an empty separator
        std::size_t parent = n - 1;
        if (!sep.empty()) {
            parent = n;
            for (auto v : sep) parent = std::min(parent, step_of[v]);
        }
        clique.parent = static_cast<int>(parent);
        for (auto v : sep) clique.separator_size *= static_cast<std::size_t>(s.cardinality(v));
    }
    for (std::size_t t = 0; t + 1 < n; ++t) {
        auto& clique = cliques_[t];
        clique.to_separator = project(s, clique.vars, separators[t]);
        clique.parent_to_separator =
            project(s, cliques_[static_cast<std::size_t>(clique.parent)].vars, separators[t]);
    }

    home_.resize(n);
    family_map_.resize(n);
    value_map_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto vars = family_vars(s, i);
        std::size_t first = n;
        for (auto v : vars) first = std::min(first, step_of[v]);
        home_[i] = first;
        cliques_[first].nodes.push_back(i);
        family_map_[i] = project(s, cliques_[first].vars, vars);
        auto values = project(s, cliques_[first].vars, {i});
        value_map_[i].assign(values.begin(), values.end());
    }
}

std::size_t JunctionTree::total_entries() const {
    std::size_t total = 0;
    for (const auto& c : cliques_) total += c.size;
    return total;
}

// ---------------------------------------------------------------------------
// InferenceWorkspace

InferenceWorkspace::InferenceWorkspace(const Network& net)
    : structure_(&net.structure()), tree_(&net.structure().junction_tree()) {
    const auto& s = *structure_;
    offsets_.assign(s.size() + 1, 0);
    family_offsets_.assign(s.size() + 1, 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        offsets_[i + 1] = offsets_[i] + static_cast<std::size_t>(s.cardinality(i));
        family_offsets_[i + 1] =
            family_offsets_[i] + s.parent_configurations(i) * static_cast<std::size_t>(s.cardinality(i));
    }
    const auto& cliques = tree_->cliques();
    base_.resize(cliques.size());
    belief_.resize(cliques.size());
    upward_.resize(cliques.size());
    upward_sum_.assign(cliques.size(), 0.0);
    std::size_t widest_separator = 1;
    for (std::size_t c = 0; c < cliques.size(); ++c) {
        belief_[c].resize(cliques[c].size);
        upward_[c].resize(cliques[c].separator_size);
        widest_separator = std::max(widest_separator, cliques[c].separator_size);
    }
    scratch_.resize(widest_separator);
    set_parameters(net);
}

void InferenceWorkspace::set_parameters(const Network& net) {
    if (&net.structure() != structure_ && !(net.spec() == structure_->spec()))
        throw Error(ErrorCode::SpecMismatch, "workspace was built for a different network");
    const auto& cliques = tree_->cliques();
    for (std::size_t c = 0; c < cliques.size(); ++c) {
        auto& base = base_[c];
        base.assign(cliques[c].size, 1.0);
        for (auto node : cliques[c].nodes) {
            const auto& map = tree_->family_map(node);
            const auto& table = net.cpt(node).table;
            for (std::size_t e = 0; e < base.size(); ++e) base[e] *= table[map[e]];
        }
    }
}

std::optional<double> InferenceWorkspace::calibrate(std::span<const double> flat) {
    const auto& cliques = tree_->cliques();
    const std::size_t count = cliques.size();

    for (std::size_t c = 0; c < count; ++c) {
        auto& belief = belief_[c];
        std::copy(base_[c].begin(), base_[c].end(), belief.begin());
        for (auto node : cliques[c].nodes) {
            const double* ev = flat.data() + offsets_[node];
            const auto& values = tree_->value_map(node);
            for (std::size_t e = 0; e < belief.size(); ++e) belief[e] *= ev[values[e]];
        }
    }

    double log_scale = 0.0;
    for (std::size_t c = 0; c + 1 < count; ++c) {
        const auto& clique = cliques[c];
        auto& up = upward_[c];
        std::fill(up.begin(), up.end(), 0.0);
        const auto& belief = belief_[c];
        for (std::size_t e = 0; e < belief.size(); ++e) up[clique.to_separator[e]] += belief[e];
        double sum = 0.0;
        for (double v : up) sum += v;
        if (!(sum > 0.0)) return std::nullopt;
        upward_sum_[c] = sum;
        for (auto& v : up) v /= sum;
        log_scale += std::log(sum);
        auto& parent = belief_[static_cast<std::size_t>(clique.parent)];
        for (std::size_t e = 0; e < parent.size(); ++e) parent[e] *= up[clique.parent_to_separator[e]];
    }

    auto& root = belief_[count - 1];
    double z = 0.0;
    for (double v : root) z += v;
    if (!(z > 0.0)) return std::nullopt;
    for (auto& v : root) v /= z;

    for (std::size_t c = count - 1; c-- > 0;) {
        const auto& clique = cliques[c];
        const auto& parent = belief_[static_cast<std::size_t>(clique.parent)];
        std::fill(scratch_.begin(), scratch_.begin() + clique.separator_size, 0.0);
        for (std::size_t e = 0; e < parent.size(); ++e) scratch_[clique.parent_to_separator[e]] += parent[e];
        const auto& up = upward_[c];
        for (std::size_t j = 0; j < clique.separator_size; ++j)
            scratch_[j] = up[j] > 0.0 ? scratch_[j] / (up[j] * upward_sum_[c]) : 0.0;
        auto& belief = belief_[c];
        for (std::size_t e = 0; e < belief.size(); ++e) belief[e] *= scratch_[clique.to_separator[e]];
    }
    return std::log(std::max(z, kLogFloor)) + log_scale;
}

void InferenceWorkspace::family_table(std::size_t node, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const auto& belief = belief_[tree_->clique_of(node)];
    const auto& map = tree_->family_map(node);
    for (std::size_t e = 0; e < belief.size(); ++e) out[map[e]] += belief[e];
}

// ---------------------------------------------------------------------------

FamilyTables family_marginals(const Network& net, const Evidence& evidence, InferenceMethod method) {
    const auto& s = net.structure();
    auto flat = flatten_evidence(s, evidence);
    const double log_scale = rescale_evidence(s, flat);
    if (method == InferenceMethod::Enumeration) return enumerate_families(net, flat, log_scale);

    InferenceWorkspace ws(net);
    auto log_z = ws.calibrate(flat);
    if (!log_z) throw Error(ErrorCode::AllZeroLikelihood, "evidence annihilates every joint configuration");
    FamilyTables out;
    out.log_evidence = *log_z + log_scale;
    out.tables.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.tables[i].resize(s.parent_configurations(i) * static_cast<std::size_t>(s.cardinality(i)));
        ws.family_table(i, out.tables[i]);
    }
    return out;
}

double log_evidence(const Network& net, const Evidence& evidence, InferenceMethod method) {
    return family_marginals(net, evidence, method).log_evidence;
}

std::vector<std::vector<double>> node_marginals(const Network& net, const Evidence& evidence) {
    const auto& s = net.structure();
    auto families = family_marginals(net, evidence);
    std::vector<std::vector<double>> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto r = static_cast<std::size_t>(s.cardinality(i));
        out[i].assign(r, 0.0);
        for (std::size_t k = 0; k < families.tables[i].size(); ++k) out[i][k % r] += families.tables[i][k];
    }
    return out;
}

std::vector<double> query(const Network& net, const SensorModel& sensors,
                          std::span<const std::optional<double>> readings, std::span<const std::size_t> targets) {
    const auto& s = net.structure();
    sensors.check_compatible(s);
    if (readings.size() != s.size())
        throw Error(ErrorCode::EvidenceShapeMismatch,
                    std::to_string(readings.size()) + " readings for " + std::to_string(s.size()) + " nodes");
    std::vector<char> is_target(s.size(), 0);
    for (auto t : targets) {
        if (t >= s.size()) throw Error(ErrorCode::UnknownNode, "target index " + std::to_string(t));
        if (is_target[t]) throw Error(ErrorCode::InvalidArgument, "target '" + s.name(t) + "' listed twice");
        is_target[t] = 1;
    }

    InferenceWorkspace ws(net);
    std::vector<double> flat(ws.evidence_size(), 1.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!readings[i]) continue;
        if (!std::isfinite(*readings[i]))
            throw Error(ErrorCode::EvidenceShapeMismatch, "reading for '" + s.name(i) + "' is not finite");
        scaled_emission_likelihoods(sensors, i, *readings[i],
                                    {flat.data() + ws.evidence_offset(i), static_cast<std::size_t>(s.cardinality(i))});
    }

    // p(t | y) ∝ Σ_z p(z, y) 1[z_T = t], evaluated by clamping each target configuration
    std::size_t configs = 1;
    for (auto t : targets) configs *= static_cast<std::size_t>(s.cardinality(t));
    std::vector<double> log_weights(configs, -std::numeric_limits<double>::infinity());
    std::vector<double> clamped(flat.size());
    std::vector<int> digits(targets.size(), 0);
    for (std::size_t c = 0; c < configs; ++c) {
        clamped = flat;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const auto t = targets[j];
            for (int v = 0; v < s.cardinality(t); ++v)
                if (v != digits[j]) clamped[ws.evidence_offset(t) + static_cast<std::size_t>(v)] = 0.0;
        }
        if (auto log_z = ws.calibrate(clamped)) log_weights[c] = *log_z;
        for (std::size_t j = targets.size(); j > 0; --j) {
            if (++digits[j - 1] < s.cardinality(targets[j - 1])) break;
            digits[j - 1] = 0;
        }
    }

    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    if (!std::isfinite(top)) throw Error(ErrorCode::AllZeroLikelihood, "readings annihilate every configuration");
    std::vector<double> posterior(configs);
    double total = 0.0;
    for (std::size_t c = 0; c < configs; ++c) total += posterior[c] = std::exp(log_weights[c] - top);
    for (auto& p : posterior) p /= total;
    return posterior;
}

}  // namespace affem
