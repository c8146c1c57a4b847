#pragma once

#include <string>
#include <vector>

#include "pidtwin/geometry.hpp"
#include "pidtwin/plan.hpp"
#include "pidtwin/raster.hpp"
#include "pidtwin/symbols.hpp"

namespace pidtwin {

/// Straight line segment in whole-plan coordinates.
struct LineSegment {
    std::string id; // e.g. "Line-1"
    Point p1;
    Point p2;
    double angle_deg = 0.0; // direction folded into [0, 180)
    double length = 0.0;
};

/// Builds a segment, deriving angle and length from the endpoints.
/// Endpoints are stored with the lexicographically (y, x) smaller one first.
LineSegment make_segment(std::string id, Point a, Point b);

/// Otsu global threshold; foreground = dark ink. A histogram without variance
/// (uniform image) yields all background.
BinaryImage binarize(const PlanImage& plan);

/// Clears every pixel inside the inflated symbol boxes (closed ranges), so
/// symbol strokes do not leak into line detection.
BinaryImage mask_symbols(const BinaryImage& bin, const std::vector<SymbolDetection>& symbols,
                         double inflate);

struct HoughParams {
    double rho_res = 1.0;       // accumulator distance resolution, pixels
    double theta_res_deg = 1.0; // accumulator angle resolution, degrees
    int votes = 30;             // minimum accumulator votes for a line
    double min_len = 20.0;      // minimum segment length, pixels
    double max_gap = 5.0;       // maximum run gap bridged along a line, pixels
};

/// Segment-producing Hough transform. Repeatedly takes the strongest
/// accumulator cell, walks the corresponding line across the image collecting
/// foreground runs (bridging gaps up to max_gap), emits runs of at least
/// min_len as segments, and removes the consumed pixels' votes. Fully
/// deterministic.
std::vector<LineSegment> hough_segments(const BinaryImage& bin, const HoughParams& params = {});

struct MergeParams {
    double angle_tol_deg = 2.0; // maximum angle difference for collinearity
    double offset_tol = 3.0;    // maximum perpendicular offset, pixels
    double gap_tol = 10.0;      // maximum endpoint gap along the line, pixels
};

/// Fuses collinear fragments (angle, offset and gap within tolerance, closed
/// transitively) into maximal segments. Order-independent and idempotent;
/// ids are reassigned ("Line-1" ...) in canonical order.
std::vector<LineSegment> merge_segments(std::vector<LineSegment> segs,
                                        const MergeParams& params = {});

} // namespace pidtwin
