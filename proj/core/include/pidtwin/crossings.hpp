#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pidtwin/geometry.hpp"
#include "pidtwin/lines.hpp"

namespace pidtwin {

/// A point where detected segments meet, classified by how many distinct ray
/// directions depart from it. Two or three departing directions mean the lines
/// are hydraulically connected; four mean a non-connecting crossover.
struct LineCrossing {
    std::string id; // e.g. "LineCrossing-1"
    Point at;
    std::vector<std::string> incident; // segment ids, sorted
    int degree = 0;                    // distinct departing ray directions
    bool connective = false;
};

struct CrossingParams {
    double eps = 2.0;            // segment-range inclusion + minimum ray length, pixels
    double cluster_radius = 3.0; // pairwise intersections closer than this are one crossing
    double angle_tol_deg = 10.0; // rays within this tolerance count as one direction
    bool four_way_connective = false; // inverted rule for plans drawn with jump symbols
};

/// Determinant-formula intersection of two segments, accepted when the point
/// lies within both segments extended by eps at each end. Parallel segments
/// yield nullopt. Exactly symmetric in its arguments.
std::optional<Point> intersect(const LineSegment& a, const LineSegment& b, double eps);

/// Pairwise O(n^2) intersection scan, clustering nearby intersection points
/// into single crossings and classifying each by its departing ray count.
/// Output is sorted by (y, x) and ids are assigned in that order.
std::vector<LineCrossing> find_crossings(const std::vector<LineSegment>& segs,
                                         const CrossingParams& params = {});

} // namespace pidtwin
