#include "affem/baseline.hpp"

#include <cmath>

#include "affem/em.hpp"
#include "affem/error.hpp"

namespace affem {

DiscretizedDataset discretize(const SensorModel& sensors, const std::vector<std::vector<double>>& priors,
                              const Dataset& data) {
    if (priors.size() != sensors.size())
        throw Error(ErrorCode::EvidenceShapeMismatch, "one prior per sensor is required");
    if (data.columns() != sensors.size())
        throw Error(ErrorCode::EvidenceShapeMismatch, "dataset columns do not match the sensor model");
    for (std::size_t i = 0; i < priors.size(); ++i) {
        double total = 0.0;
        for (double p : priors[i]) total += p;
        if (std::abs(total - 1.0) > kRowSumTolerance)
            throw Error(ErrorCode::NotNormalized, "prior for sensor " + std::to_string(i) + " is not normalized");
    }

    DiscretizedDataset out(data.columns());
    out.reserve(data.size());
    std::vector<int> row(data.columns());
    for (std::size_t k = 0; k < data.size(); ++k) {
        for (std::size_t i = 0; i < data.columns(); ++i) row[i] = map_assign(sensors, priors[i], i, data.at(k, i));
        out.push_back(row);
    }
    return out;
}

std::vector<std::vector<double>> family_counts(const Structure& structure, const DiscretizedDataset& data) {
    if (data.columns() != structure.size())
        throw Error(ErrorCode::ShapeMismatch, "dataset columns do not match the network");
    std::vector<std::vector<double>> counts(structure.size());
    for (std::size_t i = 0; i < structure.size(); ++i)
        counts[i].assign(structure.parent_configurations(i) * static_cast<std::size_t>(structure.cardinality(i)), 0.0);
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto row = data.row(k);
        for (std::size_t i = 0; i < structure.size(); ++i) {
            if (row[i] < 0 || row[i] >= structure.cardinality(i))
                throw Error(ErrorCode::ShapeMismatch, "experiment " + std::to_string(k) + " has value " +
                                                          std::to_string(row[i]) + " for '" + structure.name(i) + "'");
        }
        for (std::size_t i = 0; i < structure.size(); ++i) {
            const auto j = structure.parent_configuration(i, row) * static_cast<std::size_t>(structure.cardinality(i)) +
                           static_cast<std::size_t>(row[i]);
            counts[i][j] += 1.0;
        }
    }
    return counts;
}

Network count_mle(const DiscretizedDataset& data, std::shared_ptr<const Structure> structure) {
    auto cpts = normalize_counts(*structure, family_counts(*structure, data));
    return Network(std::move(structure), std::move(cpts));
}

Network count_mle(const DiscretizedDataset& data, const NetworkSpec& spec) {
    return count_mle(data, std::make_shared<const Structure>(spec));
}

Network count_bayes(const DiscretizedDataset& data, std::shared_ptr<const Structure> structure, double pseudo_count) {
    if (!(pseudo_count > 0.0) || !std::isfinite(pseudo_count))
        throw Error(ErrorCode::InvalidArgument, "pseudo_count must be finite and > 0");
    auto cpts = normalize_counts(*structure, family_counts(*structure, data), pseudo_count);
    return Network(std::move(structure), std::move(cpts));
}

Network count_bayes(const DiscretizedDataset& data, const NetworkSpec& spec, double pseudo_count) {
    return count_bayes(data, std::make_shared<const Structure>(spec), pseudo_count);
}

}  // namespace affem
