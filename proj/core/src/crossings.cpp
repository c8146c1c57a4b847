#include "pidtwin/crossings.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pidtwin/errors.hpp"

namespace pidtwin {

namespace {

/// Projection parameter of p onto the segment axis, in pixels from p1.
double along(const LineSegment& s, const Point& p) {
    const double ux = (s.p2.x - s.p1.x) / s.length;
    const double uy = (s.p2.y - s.p1.y) / s.length;
    return (p.x - s.p1.x) * ux + (p.y - s.p1.y) * uy;
}

} // namespace

std::optional<Point> intersect(const LineSegment& a, const LineSegment& b, double eps) {
    const double x1 = a.p1.x, y1 = a.p1.y, x2 = a.p2.x, y2 = a.p2.y;
    const double x3 = b.p1.x, y3 = b.p1.y, x4 = b.p2.x, y4 = b.p2.y;

    // Each product below is commutative and the two-term differences negate
    // exactly under an argument swap, so the quotients are bit-identical
    // either way: intersect(a,b) == intersect(b,a).
    const double den = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4);
    if (den == 0.0) return std::nullopt; // parallel (or collinear)

    const double da = x1 * y2 - y1 * x2;
    const double db = x3 * y4 - y3 * x4;
    const Point p {(da * (x3 - x4) - (x1 - x2) * db) / den,
                   (da * (y3 - y4) - (y1 - y2) * db) / den};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return std::nullopt;

    const double ta = along(a, p);
    if (ta < -eps || ta > a.length + eps) return std::nullopt;
    const double tb = along(b, p);
    if (tb < -eps || tb > b.length + eps) return std::nullopt;
    return p;
}

namespace {

struct Hit {
    Point at;
    size_t i = 0;
    size_t j = 0;
};

struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n) {
        for (size_t i = 0; i < n; ++i) parent[i] = i;
    }
    size_t find(size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent[b] = a;
    }
};

/// Number of distinct departing directions among the rays, with circular
/// angular clustering.
int count_directions(std::vector<double> angles_deg, double tol) {
    if (angles_deg.empty()) return 0;
    std::sort(angles_deg.begin(), angles_deg.end());
    int groups = 1;
    for (size_t i = 1; i < angles_deg.size(); ++i)
        if (angles_deg[i] - angles_deg[i - 1] > tol) ++groups;
    // Wrap-around: the first and last sorted angles may be one direction.
    if (groups > 1 && (angles_deg.front() + 360.0) - angles_deg.back() <= tol) --groups;
    return groups;
}

} // namespace

std::vector<LineCrossing> find_crossings(const std::vector<LineSegment>& segs,
                                         const CrossingParams& params) {
    if (params.eps < 0.0 || params.cluster_radius < 0.0 || params.angle_tol_deg < 0.0)
        throw ConfigError("find_crossings: tolerances must be non-negative");

    std::vector<Hit> hits;
    for (size_t i = 0; i < segs.size(); ++i)
        for (size_t j = i + 1; j < segs.size(); ++j)
            if (auto p = intersect(segs[i], segs[j], params.eps))
                hits.push_back({*p, i, j});

    UnionFind uf(hits.size());
    for (size_t i = 0; i < hits.size(); ++i)
        for (size_t j = i + 1; j < hits.size(); ++j)
            if (distance(hits[i].at, hits[j].at) <= params.cluster_radius) uf.unite(i, j);

    std::vector<std::vector<size_t>> clusters(hits.size());
    for (size_t i = 0; i < hits.size(); ++i) clusters[uf.find(i)].push_back(i);

    std::vector<LineCrossing> out;
    for (const auto& cluster : clusters) {
        if (cluster.empty()) continue;

        Point center{0.0, 0.0};
        for (size_t h : cluster) {
            center.x += hits[h].at.x;
            center.y += hits[h].at.y;
        }
        center.x /= double(cluster.size());
        center.y /= double(cluster.size());

        std::vector<size_t> seg_ids;
        for (size_t h : cluster) {
            seg_ids.push_back(hits[h].i);
            seg_ids.push_back(hits[h].j);
        }
        std::sort(seg_ids.begin(), seg_ids.end());
        seg_ids.erase(std::unique(seg_ids.begin(), seg_ids.end()), seg_ids.end());

        // One ray per incident segment endpoint that clears the center.
        std::vector<double> ray_angles;
        for (size_t si : seg_ids) {
            for (const Point* e : {&segs[si].p1, &segs[si].p2}) {
                if (distance(*e, center) <= params.eps) continue;
                double deg = std::atan2(e->y - center.y, e->x - center.x) * 180.0 /
                             std::numbers::pi;
                if (deg < 0.0) deg += 360.0;
                ray_angles.push_back(deg);
            }
        }

        LineCrossing c;
        c.at = center;
        for (size_t si : seg_ids) c.incident.push_back(segs[si].id);
        std::sort(c.incident.begin(), c.incident.end());
        c.degree = count_directions(std::move(ray_angles), params.angle_tol_deg);
        c.connective = c.degree == 2 || c.degree == 3 ||
                       (params.four_way_connective && c.degree == 4);
        out.push_back(std::move(c));
    }

    std::sort(out.begin(), out.end(), [](const LineCrossing& a, const LineCrossing& b) {
        if (a.at.y != b.at.y) return a.at.y < b.at.y;
        return a.at.x < b.at.x;
    });
    for (size_t i = 0; i < out.size(); ++i) out[i].id = "LineCrossing-" + std::to_string(i + 1);
    return out;
}

} // namespace pidtwin
