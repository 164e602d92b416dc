#include <algorithm>
#include <array>
#include <limits>
#include <string>

#include "affem/error.hpp"
#include "affem/simbench.hpp"
#include "doctest.h"
#include "topology_search.hpp"

using namespace affem;

namespace {

topology::ArcList frozen_arcs(const NetworkSpec& spec, const Structure& s) {
    topology::ArcList arcs;
    for (const auto& a : spec.arcs) arcs.emplace_back(s.index_of(a.parent), s.index_of(a.child));
    return arcs;
}

}  // namespace

TEST_CASE("frozen complex layout satisfies the published counts") {
    const auto spec = complex_network_spec();
    Structure s(spec);
    CHECK(s.size() == 8);
    CHECK(spec.arcs.size() == 10);
    CHECK(s.degrees_of_freedom() == 125);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s.cardinality(i) >= 2);
        CHECK(s.cardinality(i) <= 4);
    }
    NetworkSpec broken = spec;
    broken.arcs.pop_back();
    CHECK_THROWS_AS(check_complex_topology(broken), Error);
}

TEST_CASE("frozen complex layout is a preferred solution of the constrained search") {
    const auto spec = complex_network_spec();
    Structure s(spec);
    const std::vector<std::string> expected{"Action", "Color", "Shape", "Size", "ObjVel", "HandVel", "Contact", "Distance"};
    for (std::size_t i = 0; i < expected.size(); ++i) REQUIRE(s.name(i) == expected[i]);

    std::array<int, topology::kNodes> cards{};
    for (std::size_t i = 0; i < topology::kNodes; ++i) cards[i] = s.cardinality(i);
    const auto arcs = frozen_arcs(spec, s);
    const auto stats = topology::measure(cards, arcs);
    CHECK(stats.dof == 125);
    CHECK(topology::effect_to_effect_arcs(arcs) == 0);
    CHECK(topology::features_feeding_effects(arcs) == 3);
    for (auto e : topology::kEffects) CHECK(s.index_of("Action") < e);
    for (auto e : topology::kEffects) {
        const auto& pa = s.parents(e);
        CHECK(std::find(pa.begin(), pa.end(), 0) != pa.end());
    }

    std::size_t total = 0, smallest = std::numeric_limits<std::size_t>::max();
    topology::enumerate(125, 10, 3, [&](const topology::Candidate& c) {
        ++total;
        smallest = std::min(smallest, c.largest_cpt);
    });
    CHECK(total == 525240);
    CHECK(smallest == 36);
    CHECK(stats.largest_cpt == smallest);
}

TEST_CASE("cardinalities of the frozen arc set") {
    const auto spec = complex_network_spec();
    Structure s(spec);
    const auto arcs = frozen_arcs(spec, s);
    std::array<int, topology::kNodes> frozen{};
    for (std::size_t i = 0; i < topology::kNodes; ++i) frozen[i] = s.cardinality(i);

    // every assignment in [2, 4]^8 with 125 free parameters on these arcs
    std::size_t matches = 0;
    bool found = false;
    std::array<int, topology::kNodes> cards{};
    cards.fill(2);
    while (true) {
        if (topology::measure(cards, arcs).dof == 125) {
            ++matches;
            found = found || cards == frozen;
        }
        std::size_t i = 0;
        while (i < topology::kNodes && cards[i] == 4) cards[i++] = 2;
        if (i == topology::kNodes) break;
        ++cards[i];
    }
    CHECK(found);
    CHECK(matches >= 1);
}
