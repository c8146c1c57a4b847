#include "pidtwin/twin_export.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "pidtwin/errors.hpp"
#include "textio.hpp"

namespace pidtwin {

using nlohmann::json;
using nlohmann::ordered_json;

ClassMapping ClassMapping::defaults() {
    ClassMapping m;
    m.ontology_class = {{"Pump", "brick:Pump"},
                        {"Valve", "brick:Valve"},
                        {"HeatExchanger", "brick:Heat_Exchanger"},
                        {"Flap", "brick:Damper"}};
    m.label_code = {{"Pump", "PU"}, {"Valve", "VA"}, {"HeatExchanger", "HX"}, {"Flap", "FL"}};
    return m;
}

namespace {

bool safe_local_name(const std::string& s) {
    if (s.empty()) return false;
    auto head = [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    };
    auto body = [&](char c) { return head(c) || (c >= '0' && c <= '9') || c == '-'; };
    if (!head(s.front())) return false;
    for (char c : s)
        if (!body(c)) return false;
    return body(s.back()) && s.back() != '-';
}

/// Prefixed name when the id is a plain local name, full IRI otherwise.
std::string node_ref(const std::string& id, const std::string& base) {
    if (safe_local_name(id)) return "ex:" + id;
    std::string iri = base;
    for (char c : id) {
        if (c == '<' || c == '>' || c == '"' || c == ' ' || c == '\\') {
            static const char* hex = "0123456789ABCDEF";
            iri += '%';
            iri += hex[(unsigned char)c >> 4];
            iri += hex[(unsigned char)c & 0xF];
        } else {
            iri += c;
        }
    }
    return "<" + iri + ">";
}

} // namespace

std::string export_turtle(const TopologyGraph& g, const ClassMapping& map,
                          const TurtleOptions& opts) {
    std::string out;
    out += "@prefix brick: <https://brickschema.org/schema/Brick#> .\n";
    out += "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n";
    out += "@prefix ex: <" + opts.base_namespace + "> .\n";

    std::string pred;
    if (opts.predicate_iri.starts_with(opts.base_namespace) &&
        safe_local_name(opts.predicate_iri.substr(opts.base_namespace.size())))
        pred = "ex:" + opts.predicate_iri.substr(opts.base_namespace.size());
    else
        pred = "<" + opts.predicate_iri + ">";

    auto nodes = g.nodes;
    std::sort(nodes.begin(), nodes.end(),
              [](const TopologyGraph::Node& a, const TopologyGraph::Node& b) {
                  return a.id < b.id;
              });
    if (!nodes.empty()) out += "\n";
    for (const auto& n : nodes) {
        const auto it = map.ontology_class.find(n.cls);
        if (it == map.ontology_class.end())
            throw UnmappedClass("export_turtle: no ontology class for " + n.cls);
        out += node_ref(n.id, opts.base_namespace) + " a " + it->second + " .\n";
    }

    auto edges = g.edges;
    std::sort(edges.begin(), edges.end());
    if (!edges.empty()) out += "\n";
    for (const auto& [a, b] : edges) {
        out += node_ref(a, opts.base_namespace) + " " + pred + " " +
               node_ref(b, opts.base_namespace) + " .\n";
    }
    return out;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += "\"\"";
        else q += c;
    }
    return q + "\"";
}

/// Trailing "-<digits>" of the node id, or the fallback ordinal.
std::string node_ordinal(const std::string& id, size_t fallback) {
    const auto dash = id.rfind('-');
    if (dash != std::string::npos && dash + 1 < id.size()) {
        const std::string tail = id.substr(dash + 1);
        if (std::all_of(tail.begin(), tail.end(), [](char c) { return c >= '0' && c <= '9'; }))
            return tail;
    }
    return std::to_string(fallback);
}

} // namespace

std::string export_budo(const TopologyGraph& g, const std::string& label_template,
                        const ClassMapping& map, const BudoOptions& opts) {
    auto nodes = g.nodes;
    std::sort(nodes.begin(), nodes.end(),
              [](const TopologyGraph::Node& a, const TopologyGraph::Node& b) {
                  return a.id < b.id;
              });

    std::string out = "id,label,class\n";
    std::set<std::string> seen;
    for (size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        const auto code = map.label_code.find(n.cls);
        if (code == map.label_code.end())
            throw UnmappedClass("export_budo: no label code for " + n.cls);

        std::string label;
        for (size_t p = 0; p < label_template.size();) {
            if (label_template[p] != '{') {
                label += label_template[p++];
                continue;
            }
            const auto close = label_template.find('}', p);
            if (close == std::string::npos)
                throw TemplateFieldUnknown("export_budo: unterminated field in template: " +
                                           label_template);
            const std::string field = label_template.substr(p + 1, close - p - 1);
            if (field == "building") label += opts.building;
            else if (field == "system") label += opts.system;
            else if (field == "class_code") label += code->second;
            else if (field == "ordinal") label += node_ordinal(n.id, i + 1);
            else
                throw TemplateFieldUnknown("export_budo: unknown template field {" + field +
                                           "}");
            p = close + 1;
        }
        if (!seen.insert(label).second)
            throw LabelCollision("export_budo: duplicate label " + label);
        out += csv_field(n.id) + "," + csv_field(label) + "," + csv_field(n.cls) + "\n";
    }
    return out;
}

std::string export_json(const TopologyGraph& g) {
    auto nodes = g.nodes;
    std::sort(nodes.begin(), nodes.end(),
              [](const TopologyGraph::Node& a, const TopologyGraph::Node& b) {
                  return a.id < b.id;
              });
    auto edges = g.edges;
    std::sort(edges.begin(), edges.end());

    ordered_json doc;
    doc["plan"] = g.plan_id;
    doc["nodes"] = ordered_json::array();
    for (const auto& n : nodes) {
        ordered_json j;
        j["id"] = n.id;
        j["class"] = n.cls;
        j["bbox"] = {n.bbox.x_min, n.bbox.y_min, n.bbox.x_max, n.bbox.y_max};
        doc["nodes"].push_back(std::move(j));
    }
    doc["edges"] = ordered_json::array();
    for (const auto& [a, b] : edges) doc["edges"].push_back({a, b});
    return doc.dump(2) + "\n";
}

namespace {

[[noreturn]] void graph_fail(const std::string& what) {
    throw SchemaViolation("topology document: " + what);
}

} // namespace

TopologyGraph parse_topology_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        graph_fail(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) graph_fail("top level must be an object");
    if (!doc.contains("plan") || !doc["plan"].is_string())
        graph_fail("missing string field \"plan\"");
    if (!doc.contains("nodes") || !doc["nodes"].is_array())
        graph_fail("missing array field \"nodes\"");
    if (!doc.contains("edges") || !doc["edges"].is_array())
        graph_fail("missing array field \"edges\"");

    TopologyGraph g;
    g.plan_id = doc["plan"].get<std::string>();

    std::set<std::string> ids;
    for (const json& n : doc["nodes"]) {
        if (!n.is_object() || !n.contains("id") || !n["id"].is_string() ||
            !n.contains("class") || !n["class"].is_string() || !n.contains("bbox") ||
            !n["bbox"].is_array() || n["bbox"].size() != 4)
            graph_fail("node entries need string id, string class and bbox[4]");
        for (const json& v : n["bbox"])
            if (!v.is_number()) graph_fail("bbox entries must be numbers");
        TopologyGraph::Node node;
        node.id = n["id"].get<std::string>();
        node.cls = n["class"].get<std::string>();
        node.bbox = {n["bbox"][0].get<double>(), n["bbox"][1].get<double>(),
                     n["bbox"][2].get<double>(), n["bbox"][3].get<double>()};
        if (!node.bbox.valid()) graph_fail("node " + node.id + " has an invalid bbox");
        if (!ids.insert(node.id).second) graph_fail("duplicate node id " + node.id);
        g.nodes.push_back(std::move(node));
    }

    std::set<std::pair<std::string, std::string>> seen;
    for (const json& e : doc["edges"]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            graph_fail("edge entries must be [idA, idB]");
        std::string a = e[0].get<std::string>();
        std::string b = e[1].get<std::string>();
        if (a == b) graph_fail("self-loop on " + a);
        if (!ids.count(a) || !ids.count(b))
            graph_fail("edge endpoint missing from nodes: [" + a + ", " + b + "]");
        if (b < a) std::swap(a, b);
        if (!seen.insert({a, b}).second) graph_fail("duplicate edge [" + a + ", " + b + "]");
        g.edges.emplace_back(std::move(a), std::move(b));
    }

    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const TopologyGraph::Node& a, const TopologyGraph::Node& b) {
                  return a.id < b.id;
              });
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

TopologyGraph read_topology_json(const std::string& path) {
    return parse_topology_json(detail::read_text_file(path));
}

} // namespace pidtwin
