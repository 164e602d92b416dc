#include <filesystem>
#include <random>

#include <unistd.h>

#include "affem/error.hpp"
#include "affem/serialize.hpp"
#include "affem/simbench.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace affem;

namespace {

ErrorCode code_of(std::string_view text) {
    try {
        parse_document(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("document was accepted");
    return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("network documents round-trip") {
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(0.5, 4.0);
    for (int trial = 0; trial < 50; ++trial) {
        auto spec = testing::random_spec(g);
        auto structure = std::make_shared<const Structure>(spec);
        Rng rng(static_cast<std::uint64_t>(trial));
        Network net(structure, random_cpts(*structure, rng));
        std::vector<std::vector<double>> means(spec.nodes.size()), sigmas(spec.nodes.size());
        for (std::size_t i = 0; i < spec.nodes.size(); ++i)
            for (int v = 0; v < spec.nodes[i].cardinality; ++v) {
                means[i].push_back(u(g) * v - 1.0);
                sigmas[i].push_back(trial % 2 ? 2.5 : u(g));
            }
        auto sensors = SensorModel::per_value_sigma(means, sigmas);

        auto doc = parse_document(to_document(net, &sensors));
        CHECK(doc.spec == spec);
        REQUIRE(doc.cpts.has_value());
        for (std::size_t i = 0; i < spec.nodes.size(); ++i) CHECK((*doc.cpts)[i].table == net.cpt(i).table);
        REQUIRE(doc.sensors.has_value());
        for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
            CHECK(doc.sensors->means(i) == means[i]);
            CHECK(doc.sensors->sigmas(i) == sigmas[i]);
        }
        CHECK(to_document(doc) == to_document(net, &sensors));
        auto rebuilt = network_from_document(doc);
        CHECK(rms_error(rebuilt, net) == 0.0);
    }
}

TEST_CASE("spec-only documents") {
    auto spec = simple_network_spec();
    auto doc = parse_document(to_document(spec));
    CHECK(doc.spec == spec);
    CHECK_FALSE(doc.cpts.has_value());
    CHECK_FALSE(doc.sensors.has_value());
    CHECK_THROWS_AS(network_from_document(doc), Error);
}

TEST_CASE("file round-trip") {
    Rng rng(9);
    auto bench = make_complex_network(rng);
    const auto path = std::filesystem::temp_directory_path() / ("affem_doc_" + std::to_string(::getpid()) + ".json");
    write_document(path, {bench.network.spec(), bench.network.cpts(), bench.sensors});
    auto doc = read_document(path);
    CHECK(rms_error(network_from_document(doc), bench.network) == 0.0);
    CHECK(doc.sensors->has_shared_sigma(3));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_document(path), Error);
}

TEST_CASE("malformed documents") {
    CHECK(code_of("{") == ErrorCode::ParseError);
    CHECK(code_of("[]") == ErrorCode::ParseError);
    CHECK(code_of(R"({"format":"other","version":1,"nodes":[]})") == ErrorCode::ParseError);
    CHECK(code_of(R"({"format":"affem-network","version":9,"nodes":[]})") == ErrorCode::ParseError);
    CHECK(code_of(R"({"format":"affem-network","version":1,"nodes":[{"name":"A"}]})") == ErrorCode::ParseError);
    CHECK(code_of(R"({"format":"affem-network","version":1,"nodes":[{"name":"A","cardinality":"two"}]})") ==
          ErrorCode::ParseError);
    CHECK(code_of(R"({"format":"affem-network","version":1,
        "nodes":[{"name":"A","cardinality":2},{"name":"B","cardinality":2}],
        "arcs":[{"parent":"A","child":"B"},{"parent":"B","child":"A"}]})") == ErrorCode::CycleDetected);
    CHECK(code_of(R"({"format":"affem-network","version":1,"nodes":[{"name":"A","cardinality":2}],
        "arcs":[{"parent":"A","child":"Z"}]})") == ErrorCode::UnknownNode);
    CHECK(code_of(R"({"format":"affem-network","version":1,"nodes":[{"name":"A","cardinality":2}],
        "cpts":[{"node":"A","parents":[],"rows":[[0.7,0.7]]}]})") == ErrorCode::NotNormalized);
    CHECK(code_of(R"({"format":"affem-network","version":1,"nodes":[{"name":"A","cardinality":2}],
        "cpts":[{"node":"A","parents":[],"rows":[[0.5,0.25,0.25]]}]})") == ErrorCode::ShapeMismatch);
    CHECK(code_of(R"({"format":"affem-network","version":1,"nodes":[{"name":"A","cardinality":2}],
        "cpts":[]})") == ErrorCode::ShapeMismatch);
    CHECK(code_of(R"({"format":"affem-network","version":1,"nodes":[{"name":"A","cardinality":2}],
        "sensors":[{"node":"A","means":[0,5],"sigma":-1}]})") == ErrorCode::ParseError);
}
