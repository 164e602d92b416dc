#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "affem/network.hpp"

namespace affem {

class SensorModel;

/// Per-node likelihood vectors (soft evidence). Entry i has one
/// non-negative, possibly unnormalized, value per discrete value of node i.
using Evidence = std::vector<std::vector<double>>;

/// All-ones evidence, i.e. nothing observed.
Evidence uninformative_evidence(const Structure& structure);

/// Posterior family tables p(z_i, Pa_i | evidence). Table i uses the CPT
/// layout of node i: index = parent_row × r_i + z_i.
struct FamilyTables {
    std::vector<std::vector<double>> tables;
    /// log Σ_z p(z) Π_i e_i(z_i) for the evidence that produced the tables.
    double log_evidence = 0.0;
};

enum class InferenceMethod {
    JunctionTree,  // factorized sum-product over a clique tree
    Enumeration,   // full-joint reference path
};

/// Exact family posteriors. Throws Error{EvidenceShapeMismatch | AllZeroLikelihood}.
FamilyTables family_marginals(const Network& net, const Evidence& evidence,
                              InferenceMethod method = InferenceMethod::JunctionTree);

/// log Σ_z p(z) Π_i e_i(z_i); the normaliser is floored at 1e-300 before the log.
double log_evidence(const Network& net, const Evidence& evidence,
                    InferenceMethod method = InferenceMethod::JunctionTree);

/// Single-node posterior marginals, summed out of the family tables.
std::vector<std::vector<double>> node_marginals(const Network& net, const Evidence& evidence);

/// Exact posterior over the joint configurations of `targets` given the
/// sensor readings that are present. Result is indexed mixed-radix with the
/// first target most significant.
std::vector<double> query(const Network& net, const SensorModel& sensors,
                          std::span<const std::optional<double>> readings,
                          std::span<const std::size_t> targets);

/// Clique tree compiled from a structure by min-fill elimination. Holds only
/// index maps; it carries no parameters and is shared read-only.
class JunctionTree {
public:
    explicit JunctionTree(const Structure& structure);

    struct Clique {
        std::vector<std::size_t> vars;      // first var most significant
        std::size_t size = 1;               // number of table entries
        int parent = -1;                    // -1 only for the root (last clique)
        std::size_t separator_size = 1;
        std::vector<std::uint32_t> to_separator;         // clique entry -> separator entry
        std::vector<std::uint32_t> parent_to_separator;  // parent entry -> separator entry
        std::vector<std::size_t> nodes;     // nodes whose CPT and evidence live here
    };

    const std::vector<Clique>& cliques() const { return cliques_; }
    std::size_t clique_of(std::size_t node) const { return home_[node]; }
    /// Clique entry -> family-table index of `node`.
    const std::vector<std::uint32_t>& family_map(std::size_t node) const { return family_map_[node]; }
    /// Clique entry -> value of `node`.
    const std::vector<std::uint8_t>& value_map(std::size_t node) const { return value_map_[node]; }
    std::size_t total_entries() const;

private:
    std::vector<Clique> cliques_;
    std::vector<std::size_t> home_;
    std::vector<std::vector<std::uint32_t>> family_map_;
    std::vector<std::vector<std::uint8_t>> value_map_;
};

/// Reusable buffers for repeated junction-tree calibration under one set of
/// parameters. Not thread-safe; give each thread its own workspace.
class InferenceWorkspace {
public:
    explicit InferenceWorkspace(const Network& net);

    /// Swaps in new CPTs for the same structure.
    void set_parameters(const Network& net);

    /// Calibrates against flat evidence (node i occupies
    /// [offset(i), offset(i) + r_i)). Returns log Σ_z p(z) Π e_i(z_i), or
    /// nullopt when the evidence annihilates every configuration.
    std::optional<double> calibrate(std::span<const double> flat_evidence);

    /// Writes the calibrated family table of `node` into `out`
    /// (size = rows × r_i). Valid after a successful calibrate().
    void family_table(std::size_t node, std::span<double> out) const;

    std::size_t evidence_offset(std::size_t node) const { return offsets_[node]; }
    std::size_t evidence_size() const { return offsets_.back(); }
    std::size_t family_offset(std::size_t node) const { return family_offsets_[node]; }
    std::size_t family_total() const { return family_offsets_.back(); }

private:
    const Structure* structure_;
    const JunctionTree* tree_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> family_offsets_;
    std::vector<std::vector<double>> base_;
    std::vector<std::vector<double>> belief_;
    std::vector<std::vector<double>> upward_;
    std::vector<double> upward_sum_;
    std::vector<double> scratch_;
};

/// Flattens per-node evidence into the workspace layout after checking shapes.
std::vector<double> flatten_evidence(const Structure& structure, const Evidence& evidence);

}  // namespace affem
