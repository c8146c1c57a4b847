#pragma once

#include <algorithm>
#include <cmath>
#include <string>

namespace pidtwin {

/// Sub-pixel point in whole-plan coordinates.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
};

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Axis-aligned box, whole-plan pixel coordinates, x_min <= x_max and y_min <= y_max.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    Point center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }

    bool valid() const {
        return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
               std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
    }

    bool contains(const Point& p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }

    BoundingBox inflated(double margin) const {
        return {x_min - margin, y_min - margin, x_max + margin, y_max + margin};
    }

    BoundingBox translated(double dx, double dy) const {
        return {x_min + dx, y_min + dy, x_max + dx, y_max + dy};
    }

    friend bool operator==(const BoundingBox& a, const BoundingBox& b) {
        return a.x_min == b.x_min && a.y_min == b.y_min && a.x_max == b.x_max &&
               a.y_max == b.y_max;
    }
};

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

/// Intersection over union; 0 for disjoint boxes and for degenerate unions.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

/// Lexicographic (y_min, x_min, y_max, x_max) order, used as a deterministic tie-break.
inline bool bbox_less(const BoundingBox& a, const BoundingBox& b) {
    if (a.y_min != b.y_min) return a.y_min < b.y_min;
    if (a.x_min != b.x_min) return a.x_min < b.x_min;
    if (a.y_max != b.y_max) return a.y_max < b.y_max;
    return a.x_max < b.x_max;
}

} // namespace pidtwin
