#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pidtwin/lines.hpp"
#include "pidtwin/plan.hpp"
#include "pidtwin/symbols.hpp"
#include "pidtwin/topology.hpp"

namespace pidtwin {

/// Grid coordinates for synthetic layouts: column/row of a logical cell.
/// Cells are square; symbols sit at cell centers and conduits run between
/// cell centers, so the drawn geometry is exact.
struct GridPos {
    int col = 0;
    int row = 0;

    friend bool operator==(const GridPos& a, const GridPos& b) {
        return a.col == b.col && a.row == b.row;
    }
};

struct LayoutSymbol {
    std::string cls;
    GridPos at;
};

/// A conduit between two grid positions. Endpoints must share a row or a
/// column. An endpoint on another conduit's interior forms a T-junction, a
/// shared endpoint an L-corner; interior-interior crossings do not connect.
struct LayoutConduit {
    GridPos from;
    GridPos to;
};

struct LayoutSpec {
    std::string plan_id = "synthetic";
    int cols = 8;
    int rows = 6;
    uint32_t cell_px = 120;  // cell pitch in pixels
    uint32_t margin_px = 60; // blank border around the outermost cell centers
    uint32_t line_px = 3;    // conduit stroke width
    std::vector<LayoutSymbol> symbols;
    std::vector<LayoutConduit> conduits;

    // Rendering perturbations for robustness suites. The ground truth tracks
    // the skew (boxes become the rotated boxes' bounds) but not the noise.
    double noise = 0.0;    // fraction of pixels hit by salt-and-pepper flips
    double skew_deg = 0.0; // whole-drawing rotation about the image center
};

/// A rendered synthetic plan plus its ground truth. Truth connectivity comes
/// from the abstract layout, not from the rendered pixels: conduits are cut
/// at symbol centers and at junctions, and two symbols are connected when one
/// can be reached from the other without passing through a third symbol.
struct SyntheticPlan {
    PlanImage image;
    std::vector<SymbolDetection> symbols;      // ids assigned in reading order
    ConnectionMatrix truth;                    // ground-truth symbol connectivity
    std::vector<Point> crossing_points;        // interior-interior crossings
    std::vector<LineSegment> conduit_segments; // drawn center lines
};

/// Deterministic in (spec, seed); the seed drives only the noise.
/// Throws InfeasibleLayout for off-grid cells, diagonal or overlapping
/// conduits, duplicate symbol cells, or a symbol sitting on a crossover.
SyntheticPlan generate_synthetic_plan(const LayoutSpec& spec, uint64_t seed);

struct RandomLayoutParams {
    int cols = 8;
    int rows = 6;
    int symbol_count = 6;
    int extra_stubs = 2;    // dead-end branch conduits (best effort)
    int crossover_bars = 0; // vertical bars crossing a bus without connecting
    uint32_t cell_px = 120;
    uint32_t margin_px = 60;
};

/// Random bus-and-branch layout: one to three horizontal buses in disjoint
/// column bands, one vertical branch per symbol, optional dead-end stubs and
/// non-connecting crossover bars. Only straight runs, L-corners, T-junctions
/// and (when bars are requested) four-way crossovers occur. Deterministic in
/// (params, seed). Throws InfeasibleLayout when the grid cannot fit.
LayoutSpec random_layout(const RandomLayoutParams& params, uint64_t seed);

/// The glyph used for a class, rendered alone as a binary template mask.
/// box_px is the glyph box edge length; unknown classes get a generic glyph.
Template render_template(const std::string& cls, uint32_t box_px);

/// render_template over the default classes.
std::vector<Template> reference_templates(uint32_t box_px);

struct LineFieldSpec {
    uint32_t width = 600;
    uint32_t height = 400;
    int line_count = 8;
    uint32_t line_px = 3;
    double min_len = 80.0;
    double min_separation = 5.0; // minimum clearance between stroke inks
};

struct LineField {
    PlanImage image;
    std::vector<LineSegment> truth; // drawn center lines, canonical order
};

/// Random field of separated straight strokes at 0, 45, 90 or 135 degrees on
/// a white ground. Deterministic in (spec, seed); throws InfeasibleLayout
/// when the requested count cannot be placed.
LineField generate_line_field(const LineFieldSpec& spec, uint64_t seed);

} // namespace pidtwin
