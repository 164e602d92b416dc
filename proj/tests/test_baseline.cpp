#include <cmath>
#include <random>

#include "affem/baseline.hpp"
#include "affem/em.hpp"
#include "affem/error.hpp"
#include "affem/simbench.hpp"
#include "doctest.h"

using namespace affem;

TEST_CASE("discretize") {
    SUBCASE("near-noiseless readings recover the generating values") {
        Rng rng(1);
        auto bench = make_complex_network(rng, 1e-12);
        auto data = synthesize_dataset(bench.network, bench.sensors, 500, rng);
        auto priors = node_marginals(bench.network, uninformative_evidence(bench.network.structure()));
        CHECK(discretize(bench.sensors, priors, data.readings) == data.truth);
    }
    SUBCASE("midpoints tie-break to zero") {
        auto sensors = SensorModel::shared_sigma({{0.0, 5.0}, {0.0, 5.0, 10.0}}, {1.0, 2.0});
        Dataset data(2, {2.5, 2.5, 2.5, 2.5});
        auto out = discretize(sensors, {{0.5, 0.5}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}, data);
        for (int v : out.values()) CHECK(v == 0);
    }
    SUBCASE("misclassification rate at sigma 3 follows the Gaussian tail") {
        auto sensors = SensorModel::shared_sigma({{0.0, 5.0}}, {3.0});
        Rng rng(2);
        const int n = 100000;
        Dataset data(1);
        std::vector<int> truth;
        std::bernoulli_distribution coin(0.5);
        for (int k = 0; k < n; ++k) {
            const int v = coin(rng);
            truth.push_back(v);
            const double x = sample_reading(sensors, 0, v, rng);
            data.push_back(std::span<const double>(&x, 1));
        }
        auto labels = discretize(sensors, {{0.5, 0.5}}, data);
        int wrong = 0;
        for (int k = 0; k < n; ++k) wrong += labels.at(k, 0) != truth[k];
        const double rate = static_cast<double>(wrong) / n;
        // Φ(−2.5/3); binomial sd at n = 1e5 is about 0.0013
        CHECK(std::abs(rate - 0.20232838096364308) < 0.005);
    }
    SUBCASE("errors") {
        auto sensors = SensorModel::shared_sigma({{0.0, 5.0}}, {1.0});
        Dataset data(1, {1.0});
        CHECK_THROWS_AS(discretize(sensors, {{0.6, 0.6}}, data), Error);
        CHECK_THROWS_AS(discretize(sensors, {{1.0}}, data), Error);
        CHECK_THROWS_AS(discretize(sensors, {}, data), Error);
    }
}

TEST_CASE("count_mle") {
    NetworkSpec chain{{{"A", 2}, {"B", 2}}, {{"A", "B"}}};
    SUBCASE("every assignment once gives uniform rows") {
        DiscretizedDataset data(2, {0, 0, 0, 1, 1, 0, 1, 1});
        auto net = count_mle(data, chain);
        for (const auto& cpt : net.cpts())
            for (double v : cpt.table) CHECK(v == 0.5);
    }
    SUBCASE("single experiment") {
        DiscretizedDataset data(2, {1, 0});
        auto net = count_mle(data, chain);
        CHECK(net.cpt(0).table == std::vector<double>{0.0, 1.0});
        CHECK(net.cpt(1).table == std::vector<double>{0.5, 0.5, 1.0, 0.0});
    }
    SUBCASE("equals m_step on one-hot posteriors") {
        Rng rng(3);
        auto bench = make_complex_network(rng, 1.0);
        auto data = synthesize_dataset(bench.network, bench.sensors, 400, rng);
        const auto& s = bench.network.structure();
        FamilyPosterior post(s, data.truth.size());
        for (std::size_t k = 0; k < data.truth.size(); ++k)
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto row = data.truth.row(k);
                post.table(k, i)[s.parent_configuration(i, row) * s.cardinality(i) + row[i]] = 1.0;
            }
        auto via_em = m_step(post, s);
        auto counted = count_mle(data.truth, bench.network.structure_ptr());
        CHECK(rms_difference(via_em, counted.cpts()) < 1e-15);
    }
    SUBCASE("out-of-range values") {
        DiscretizedDataset data(2, {2, 0});
        CHECK_THROWS_AS(count_mle(data, chain), Error);
        DiscretizedDataset narrow(1, {0});
        CHECK_THROWS_AS(count_mle(narrow, chain), Error);
    }
}

TEST_CASE("count_bayes") {
    NetworkSpec chain{{{"A", 2}, {"B", 2}}, {{"A", "B"}}};
    SUBCASE("empty dataset gives uniform rows") {
        auto net = count_bayes(DiscretizedDataset(2), chain, 1.0);
        for (const auto& cpt : net.cpts())
            for (double v : cpt.table) CHECK(v == 0.5);
    }
    SUBCASE("counts (3, 1) with pseudo count 1") {
        DiscretizedDataset single(1, {0, 0, 0, 1});
        auto root = count_bayes(single, NetworkSpec{{{"A", 2}}, {}}, 1.0);
        CHECK(root.cpt(0).table[0] == doctest::Approx(4.0 / 6).epsilon(1e-15));
        CHECK(root.cpt(0).table[1] == doctest::Approx(2.0 / 6).epsilon(1e-15));
    }
    SUBCASE("small pseudo counts approach the counting estimate") {
        Rng rng(4);
        auto bench = make_simple_network(rng, 1.0);
        auto data = synthesize_dataset(bench.network, bench.sensors, 2000, rng);
        auto mle = count_mle(data.truth, bench.network.spec());
        double previous = 1.0;
        for (double a : {1.0, 1e-2, 1e-4, 1e-8}) {
            const double d = rms_difference(count_bayes(data.truth, bench.network.spec(), a).cpts(), mle.cpts());
            CHECK(d < previous);
            previous = d;
        }
        CHECK(previous < 1e-9);
    }
    SUBCASE("invalid pseudo count") {
        CHECK_THROWS_AS(count_bayes(DiscretizedDataset(2), chain, 0.0), Error);
        CHECK_THROWS_AS(count_bayes(DiscretizedDataset(2), chain, -1.0), Error);
    }
}
