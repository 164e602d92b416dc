#include "affem/serialize.hpp"

#include <fstream>
#include <sstream>

#include "affem/error.hpp"
#include "json.hpp"

namespace affem {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormat = "affem-network";
constexpr int kVersion = 1;

Json spec_json(const NetworkSpec& spec) {
    Json nodes = Json::array();
    for (const auto& n : spec.nodes) nodes.push_back({{"name", n.name}, {"cardinality", n.cardinality}});
    Json arcs = Json::array();
    for (const auto& a : spec.arcs) arcs.push_back({{"parent", a.parent}, {"child", a.child}});
    return Json{{"format", kFormat}, {"version", kVersion}, {"nodes", nodes}, {"arcs", arcs}};
}

Json cpts_json(const Structure& s, const std::vector<Cpt>& cpts) {
    Json out = Json::array();
    for (const auto& cpt : cpts) {
        Json parents = Json::array();
        for (auto p : s.parents(cpt.node)) parents.push_back(s.name(p));
        Json rows = Json::array();
        for (std::size_t r = 0; r < cpt.rows(); ++r) {
            auto row = cpt.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        out.push_back({{"node", s.name(cpt.node)}, {"parents", parents}, {"rows", rows}});
    }
    return out;
}

Json sensors_json(const NetworkSpec& spec, const SensorModel& sensors) {
    Json out = Json::array();
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        Json entry{{"node", i < spec.nodes.size() ? spec.nodes[i].name : std::to_string(i)},
                   {"means", sensors.means(i)}};
        if (sensors.has_shared_sigma(i))
            entry["sigma"] = sensors.sigma(i, 0);
        else
            entry["sigmas"] = sensors.sigmas(i);
        out.push_back(std::move(entry));
    }
    return out;
}

template <class T>
T field(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw Error(ErrorCode::ParseError, where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, where + ": bad value for '" + key + "': " + e.what());
    }
}

}  // namespace

std::string to_document(const NetworkDocument& doc) {
    Json out = spec_json(doc.spec);
    if (doc.cpts) {
        Structure s(doc.spec);
        out["cpts"] = cpts_json(s, *doc.cpts);
    }
    if (doc.sensors) out["sensors"] = sensors_json(doc.spec, *doc.sensors);
    return out.dump(2) + "\n";
}

std::string to_document(const Network& net, const SensorModel* sensors) {
    Json out = spec_json(net.spec());
    out["cpts"] = cpts_json(net.structure(), net.cpts());
    if (sensors) out["sensors"] = sensors_json(net.spec(), *sensors);
    return out.dump(2) + "\n";
}

std::string to_document(const NetworkSpec& spec) { return spec_json(spec).dump(2) + "\n"; }

NetworkDocument parse_document(std::string_view text) {
    Json root;
    try {
        root = Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw Error(ErrorCode::ParseError, "document root must be an object");
    if (root.contains("format") && root["format"] != kFormat)
        throw Error(ErrorCode::ParseError, "unexpected format tag " + root["format"].dump());
    if (root.contains("version") && root["version"] != kVersion)
        throw Error(ErrorCode::ParseError, "unsupported version " + root["version"].dump());

    NetworkDocument doc;
    const auto nodes = field<Json>(root, "nodes", "document");
    if (!nodes.is_array()) throw Error(ErrorCode::ParseError, "'nodes' must be an array");
    for (const auto& n : nodes)
        doc.spec.nodes.push_back({field<std::string>(n, "name", "node"), field<int>(n, "cardinality", "node")});
    if (root.contains("arcs")) {
        if (!root["arcs"].is_array()) throw Error(ErrorCode::ParseError, "'arcs' must be an array");
        for (const auto& a : root["arcs"])
            doc.spec.arcs.push_back({field<std::string>(a, "parent", "arc"), field<std::string>(a, "child", "arc")});
    }
    auto structure = std::make_shared<const Structure>(doc.spec);

    if (root.contains("cpts")) {
        const auto& entries = root["cpts"];
        if (!entries.is_array()) throw Error(ErrorCode::ParseError, "'cpts' must be an array");
        std::vector<std::optional<Cpt>> slots(structure->size());
        for (const auto& entry : entries) {
            const auto name = field<std::string>(entry, "node", "cpt");
            const auto i = structure->index_of(name);
            if (slots[i]) throw Error(ErrorCode::ShapeMismatch, "duplicate CPT for '" + name + "'");
            if (entry.contains("parents")) {
                const auto listed = field<std::vector<std::string>>(entry, "parents", "cpt '" + name + "'");
                std::vector<std::string> expected;
                for (auto p : structure->parents(i)) expected.push_back(structure->name(p));
                if (listed != expected)
                    throw Error(ErrorCode::ShapeMismatch, "CPT of '" + name + "' lists parents that disagree with the arcs");
            }
            const auto rows = field<std::vector<std::vector<double>>>(entry, "rows", "cpt '" + name + "'");
            Cpt cpt{i, structure->cardinality(i), {}};
            for (const auto& row : rows) {
                if (row.size() != static_cast<std::size_t>(cpt.cardinality))
                    throw Error(ErrorCode::ShapeMismatch, "CPT of '" + name + "' has a row of the wrong length");
                cpt.table.insert(cpt.table.end(), row.begin(), row.end());
            }
            slots[i] = std::move(cpt);
        }
        std::vector<Cpt> cpts;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!slots[i]) throw Error(ErrorCode::ShapeMismatch, "no CPT for '" + structure->name(i) + "'");
            cpts.push_back(std::move(*slots[i]));
        }
        Network check(structure, cpts);
        doc.cpts = std::move(cpts);
    }

    if (root.contains("sensors")) {
        const auto& entries = root["sensors"];
        if (!entries.is_array()) throw Error(ErrorCode::ParseError, "'sensors' must be an array");
        std::vector<std::vector<double>> means(structure->size());
        std::vector<std::vector<double>> sigmas(structure->size());
        std::vector<char> seen(structure->size(), 0);
        for (const auto& entry : entries) {
            const auto name = field<std::string>(entry, "node", "sensor");
            const auto i = structure->index_of(name);
            if (seen[i]) throw Error(ErrorCode::ShapeMismatch, "duplicate sensor for '" + name + "'");
            seen[i] = 1;
            means[i] = field<std::vector<double>>(entry, "means", "sensor '" + name + "'");
            if (entry.contains("sigmas"))
                sigmas[i] = field<std::vector<double>>(entry, "sigmas", "sensor '" + name + "'");
            else
                sigmas[i].assign(means[i].size(), field<double>(entry, "sigma", "sensor '" + name + "'"));
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i]) throw Error(ErrorCode::ShapeMismatch, "no sensor for '" + structure->name(i) + "'");
        try {
            doc.sensors = SensorModel::per_value_sigma(std::move(means), std::move(sigmas));
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, e.what());
        }
        doc.sensors->check_compatible(*structure);
    }
    return doc;
}

NetworkDocument read_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_document(buffer.str());
}

void write_document(const std::filesystem::path& path, const NetworkDocument& doc) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << to_document(doc);
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Network network_from_document(const NetworkDocument& doc) {
    if (!doc.cpts) throw Error(ErrorCode::ShapeMismatch, "document has no CPT section");
    return Network::validate(doc.spec, *doc.cpts);
}

}  // namespace affem
