#pragma once

#include <map>
#include <string>

#include "pidtwin/topology.hpp"

namespace pidtwin {

/// Maps equipment classes to ontology classes and label codes.
struct ClassMapping {
    std::map<std::string, std::string> ontology_class; // e.g. Pump -> brick:Pump
    std::map<std::string, std::string> label_code;     // e.g. Pump -> PU

    /// Pump -> brick:Pump/PU, Valve -> brick:Valve/VA,
    /// HeatExchanger -> brick:Heat_Exchanger/HX, Flap -> brick:Damper/FL.
    static ClassMapping defaults();
};

struct TurtleOptions {
    std::string base_namespace = "urn:pidtwin:";
    std::string predicate_iri = "urn:pidtwin:connectedTo"; // symmetric connection predicate
};

/// Serializes the graph as Turtle: a fixed prefix block, one rdf:type statement
/// per node, one connection statement per edge, all in sorted order.
/// Throws UnmappedClass when a node's class has no ontology mapping.
std::string export_turtle(const TopologyGraph& g, const ClassMapping& map,
                          const TurtleOptions& opts = {});

struct BudoOptions {
    std::string building = "B1";
    std::string system = "H";
};

/// Expands the label template ({building}, {system}, {class_code}, {ordinal})
/// once per node and returns a CSV table with header "id,label,class".
/// Throws TemplateFieldUnknown for other fields and LabelCollision when two
/// nodes expand to the same label.
std::string export_budo(const TopologyGraph& g, const std::string& label_template,
                        const ClassMapping& map, const BudoOptions& opts = {});

/// Canonical Topology JSON:
///   { "plan": string, "nodes": [ { "id", "class", "bbox": [4] } ],
///     "edges": [ [idA, idB], ... ] }
/// Deterministic bytes; parse_topology_json(export_json(g)) == g.
std::string export_json(const TopologyGraph& g);

/// Parses and validates Topology JSON (edge endpoints exist, no self-loops,
/// no duplicate edges). Throws SchemaViolation.
TopologyGraph parse_topology_json(const std::string& text);
TopologyGraph read_topology_json(const std::string& path);

} // namespace pidtwin
