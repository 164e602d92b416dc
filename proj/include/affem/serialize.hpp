#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affem/network.hpp"
#include "affem/sensor.hpp"

namespace affem {

/// Contents of a network document (see docs/formats.md). Only the spec is
/// mandatory; CPTs and the sensor section are optional.
struct NetworkDocument {
    NetworkSpec spec;
    std::optional<std::vector<Cpt>> cpts;
    std::optional<SensorModel> sensors;
};

std::string to_document(const NetworkDocument& doc);
std::string to_document(const Network& net, const SensorModel* sensors = nullptr);
std::string to_document(const NetworkSpec& spec);

/// Throws Error{ParseError} for malformed input and the bn-core validation
/// errors when the CPT section is inconsistent with the spec.
NetworkDocument parse_document(std::string_view text);

NetworkDocument read_document(const std::filesystem::path& path);
void write_document(const std::filesystem::path& path, const NetworkDocument& doc);

/// Validated network from a document that carries CPTs.
Network network_from_document(const NetworkDocument& doc);

}  // namespace affem
