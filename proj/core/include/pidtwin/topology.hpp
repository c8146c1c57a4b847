#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "pidtwin/crossings.hpp"
#include "pidtwin/geometry.hpp"
#include "pidtwin/lines.hpp"
#include "pidtwin/symbols.hpp"

namespace pidtwin {

/// Symmetric boolean adjacency over the plan's symbols. Diagonal stays false.
class ConnectionMatrix {
public:
    ConnectionMatrix() = default;
    explicit ConnectionMatrix(std::vector<std::string> symbol_ids);

    size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

    std::optional<size_t> index_of(const std::string& id) const;

    bool at(size_t i, size_t j) const;
    void set(size_t i, size_t j, bool connected = true); // sets (i,j) and (j,i)

    size_t edge_count() const;
    std::vector<std::pair<std::string, std::string>> edges() const; // canonical, sorted

    friend bool operator==(const ConnectionMatrix& a, const ConnectionMatrix& b) {
        return a.ids_ == b.ids_ && a.cells_ == b.cells_;
    }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, size_t> index_;
    std::vector<uint8_t> cells_;
};

/// Either a symbol or a line crossing; the things a walk along a line can meet.
struct PlanElement {
    std::variant<SymbolDetection, LineCrossing> value;

    bool is_symbol() const { return std::holds_alternative<SymbolDetection>(value); }
    const SymbolDetection& symbol() const { return std::get<SymbolDetection>(value); }
    const LineCrossing& crossing() const { return std::get<LineCrossing>(value); }
    const std::string& id() const {
        return is_symbol() ? symbol().id : crossing().id;
    }
};

/// The exportable typed graph: nodes are symbols, edges are undirected
/// hydraulic connections.
struct TopologyGraph {
    struct Node {
        std::string id;
        std::string cls;
        BoundingBox bbox;

        friend bool operator==(const Node& a, const Node& b) {
            return a.id == b.id && a.cls == b.cls && a.bbox == b.bbox;
        }
    };

    std::vector<Node> nodes;                                  // sorted by id
    std::vector<std::pair<std::string, std::string>> edges;   // canonical pairs, sorted
    std::string plan_id;

    // Run metadata; serialized into the run manifest only, never into the
    // deterministic exports.
    std::string config_hash;
    std::string extracted_at;

    friend bool operator==(const TopologyGraph& a, const TopologyGraph& b) {
        return a.nodes == b.nodes && a.edges == b.edges && a.plan_id == b.plan_id;
    }
};

/// Liang-Barsky clip of a segment against a box. Returns the clipped parameter
/// interval [t0, t1] (pixels along the segment from p1), closed at the
/// boundary, or nullopt when the segment misses the box entirely.
std::optional<std::pair<double, double>> clip_segment_to_box(const LineSegment& seg,
                                                             const BoundingBox& box);

/// Segments whose Liang-Barsky clip against the symbol's inflated bbox is
/// non-empty (touching the boundary counts).
std::vector<LineSegment> lines_through_symbol(const SymbolDetection& sym,
                                              const std::vector<LineSegment>& segs,
                                              double inflate);

struct DeriveParams {
    double attach_inflate = 3.0; // bbox inflation for line attachment, pixels
};

/// Nearest element in each travel direction along the line from the symbol's
/// clipped interval; equidistant elements are all retained. Distances run from
/// the bbox edge along the line; elements behind other elements are excluded.
std::vector<PlanElement> nearest_elements(const SymbolDetection& sym, const LineSegment& line,
                                          const std::vector<PlanElement>& elements,
                                          const DeriveParams& params = {});

/// Walks along every line from every symbol, expanding through connective
/// crossings (and straight past crossovers), and collects the symmetric
/// connection matrix. Rows follow the input symbol order.
ConnectionMatrix derive_connections(const std::vector<SymbolDetection>& symbols,
                                    const std::vector<LineSegment>& segs,
                                    const std::vector<LineCrossing>& crossings,
                                    const DeriveParams& params = {});

/// One node per symbol, one undirected edge per true upper-triangle cell.
/// Nodes are sorted by id, edges canonicalized and sorted.
TopologyGraph matrix_to_graph(const ConnectionMatrix& m,
                              const std::vector<SymbolDetection>& symbols);

} // namespace pidtwin
