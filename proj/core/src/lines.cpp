#include "pidtwin/lines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "pidtwin/errors.hpp"

namespace pidtwin {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool point_less(const Point& a, const Point& b) {
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
}

} // namespace

LineSegment make_segment(std::string id, Point a, Point b) {
    if (a == b) throw Error("make_segment: zero-length segment");
    if (point_less(b, a)) std::swap(a, b);
    LineSegment s;
    s.id = std::move(id);
    s.p1 = a;
    s.p2 = b;
    s.length = distance(a, b);
    double deg = std::atan2(b.y - a.y, b.x - a.x) / kDegToRad;
    if (deg < 0.0) deg += 180.0;
    if (deg >= 180.0) deg -= 180.0;
    s.angle_deg = deg;
    return s;
}

BinaryImage binarize(const PlanImage& plan) {
    std::array<uint64_t, 256> hist{};
    for (uint8_t v : plan.pixels()) ++hist[v];

    const double total = double(plan.pixels().size());
    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += double(i) * double(hist[i]);

    // Cut point T splits intensities into [0, T) and [T, 255]; the best T
    // maximizes between-class variance, smallest T on ties.
    int best_cut = -1;
    double best_var = 0.0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 1; t < 256; ++t) {
        w0 += double(hist[t - 1]);
        sum0 += double(t - 1) * double(hist[t - 1]);
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0;
        const double m1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (var > best_var) {
            best_var = var;
            best_cut = t;
        }
    }

    BinaryImage out(plan.width(), plan.height());
    if (best_cut < 0) return out; // no intensity variance: all background
    for (uint32_t y = 0; y < plan.height(); ++y)
        for (uint32_t x = 0; x < plan.width(); ++x)
            if (plan.at(x, y) < best_cut) out.set(x, y, true);
    return out;
}

BinaryImage mask_symbols(const BinaryImage& bin, const std::vector<SymbolDetection>& symbols,
                         double inflate) {
    BinaryImage out = bin;
    for (const auto& s : symbols) {
        const BoundingBox b = s.bbox.inflated(inflate);
        const int64_t x0 = std::max<int64_t>(0, int64_t(std::ceil(b.x_min)));
        const int64_t y0 = std::max<int64_t>(0, int64_t(std::ceil(b.y_min)));
        const int64_t x1 = std::min<int64_t>(int64_t(bin.width()) - 1, int64_t(std::floor(b.x_max)));
        const int64_t y1 = std::min<int64_t>(int64_t(bin.height()) - 1, int64_t(std::floor(b.y_max)));
        for (int64_t y = y0; y <= y1; ++y)
            for (int64_t x = x0; x <= x1; ++x) out.set(uint32_t(x), uint32_t(y), false);
    }
    return out;
}

namespace {

struct HoughGrid {
    int n_theta = 0;
    int n_rho = 0;
    int rho_offset = 0; // index of rho = 0
    double rho_res = 1.0;
    std::vector<double> cos_t;
    std::vector<double> sin_t;
    std::vector<int32_t> acc;      // n_theta x n_rho
    std::vector<uint8_t> dead;     // bins excluded from further peaks

    int32_t& at(int t, int r) { return acc[size_t(t) * n_rho + r]; }

    int rho_index(double x, double y, int t) const {
        const double rho = x * cos_t[t] + y * sin_t[t];
        return int(std::lround(rho / rho_res)) + rho_offset;
    }
};

HoughGrid build_grid(const BinaryImage& bin, const HoughParams& p) {
    HoughGrid g;
    g.rho_res = p.rho_res;
    g.n_theta = std::max(1, int(std::lround(180.0 / p.theta_res_deg)));
    const double diag = std::hypot(double(bin.width()), double(bin.height()));
    g.rho_offset = int(std::ceil(diag / p.rho_res)) + 1;
    g.n_rho = 2 * g.rho_offset + 1;
    g.cos_t.resize(g.n_theta);
    g.sin_t.resize(g.n_theta);
    for (int t = 0; t < g.n_theta; ++t) {
        const double theta = t * p.theta_res_deg * kDegToRad;
        g.cos_t[t] = std::cos(theta);
        g.sin_t[t] = std::sin(theta);
    }
    g.acc.assign(size_t(g.n_theta) * g.n_rho, 0);
    g.dead.assign(g.acc.size(), 0);

    for (uint32_t y = 0; y < bin.height(); ++y)
        for (uint32_t x = 0; x < bin.width(); ++x)
            if (bin.at(x, y))
                for (int t = 0; t < g.n_theta; ++t)
                    ++g.at(t, g.rho_index(double(x), double(y), t));
    return g;
}

void unvote(HoughGrid& g, uint32_t x, uint32_t y) {
    for (int t = 0; t < g.n_theta; ++t) --g.at(t, g.rho_index(double(x), double(y), t));
}

struct Peak {
    int t = -1;
    int r = -1;
    int32_t votes = 0;
};

Peak find_peak(const HoughGrid& g, int32_t min_votes) {
    Peak best;
    for (int t = 0; t < g.n_theta; ++t) {
        for (int r = 0; r < g.n_rho; ++r) {
            const size_t idx = size_t(t) * g.n_rho + r;
            if (g.dead[idx]) continue;
            const int32_t v = g.acc[idx];
            if (v >= min_votes && v > best.votes) {
                best = {t, r, v};
            }
        }
    }
    return best;
}

struct LineEq {
    double c = 1.0, s = 0.0, rho = 0.0; // unit normal (c, s): x c + y s = rho
};

struct WalkStep {
    Point ideal;                                   // point on the traced line
    std::vector<std::pair<uint32_t, uint32_t>> fg; // supporting pixels found
};

struct Walk {
    bool along_x = true; // major traversal axis; the probe spans the other one
    std::vector<WalkStep> steps;
};

using PixelList = std::vector<std::pair<uint32_t, uint32_t>>;

/// Visits the line across the image along its major axis, probing one pixel
/// to each side, and reports each step's support.
Walk walk_line(const BinaryImage& bin, const LineEq& eq) {
    Walk walk;
    const double c = eq.c;
    const double s = eq.s;
    const int64_t w = bin.width(), h = bin.height();
    walk.along_x = std::abs(s) >= std::abs(c);

    if (walk.along_x) {
        // Mostly horizontal: y = (rho - x c) / s.
        for (int64_t x = 0; x < w; ++x) {
            const double y = (eq.rho - double(x) * c) / s;
            const int64_t yr = std::llround(y);
            if (yr < -1 || yr > h) continue;
            WalkStep st;
            st.ideal = {double(x), y};
            for (int64_t k = -1; k <= 1; ++k)
                if (bin.in_bounds(x, yr + k) && bin.at(uint32_t(x), uint32_t(yr + k)))
                    st.fg.emplace_back(uint32_t(x), uint32_t(yr + k));
            walk.steps.push_back(std::move(st));
        }
    } else {
        // Mostly vertical: x = (rho - y s) / c.
        for (int64_t y = 0; y < h; ++y) {
            const double x = (eq.rho - double(y) * s) / c;
            const int64_t xr = std::llround(x);
            if (xr < -1 || xr > w) continue;
            WalkStep st;
            st.ideal = {x, double(y)};
            for (int64_t k = -1; k <= 1; ++k)
                if (bin.in_bounds(xr + k, y) && bin.at(uint32_t(xr + k), uint32_t(y)))
                    st.fg.emplace_back(uint32_t(xr + k), uint32_t(y));
            walk.steps.push_back(std::move(st));
        }
    }
    return walk;
}

/// Maximal ranges of supported steps, bridging gaps of up to max_gap steps.
std::vector<std::pair<size_t, size_t>> support_runs(const std::vector<WalkStep>& steps,
                                                    double max_gap) {
    std::vector<std::pair<size_t, size_t>> runs;
    bool in_run = false;
    size_t begin = 0, last = 0;
    for (size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].fg.empty()) continue;
        if (!in_run) {
            in_run = true;
            begin = i;
        } else if (double(i - last) > max_gap) {
            runs.emplace_back(begin, last);
            begin = i;
        }
        last = i;
    }
    if (in_run) runs.emplace_back(begin, last);
    return runs;
}

/// Ink in the outer ring (3..4 pixels off the traced line) beside a cluster
/// marks a transversal stroke crossing the line, not the stroke's own cap:
/// a cap keeps all of its ink within the stroke's half width.
bool foreign_cluster(const BinaryImage& bin, const Walk& walk, size_t cb, size_t ce,
                     bool trailing) {
    const auto& steps = walk.steps;
    size_t lo = cb, hi = ce;
    if (trailing)
        hi = std::min(steps.size() - 1, ce + 4);
    else
        lo = cb >= 4 ? cb - 4 : 0;
    for (size_t i = lo; i <= hi; ++i) {
        const Point& q = steps[i].ideal;
        const int64_t major = int64_t(walk.along_x ? q.x : q.y);
        const int64_t minor = std::llround(walk.along_x ? q.y : q.x);
        for (int64_t k : {-4, -3, 3, 4}) {
            const int64_t px = walk.along_x ? major : minor + k;
            const int64_t py = walk.along_x ? minor + k : major;
            if (bin.in_bounds(px, py) && bin.at(uint32_t(px), uint32_t(py))) return true;
        }
    }
    return false;
}

/// Shrinks a run whose end cluster is either no longer than the gap that
/// attaches it or flagged as transversal ink: such a clump is a crossing
/// stroke grazing the line's extension, not the stroke's own cap.
void trim_run(const BinaryImage& bin, const Walk& walk, size_t& first, size_t& last) {
    const auto& steps = walk.steps;
    for (;;) {
        size_t e = first;
        while (e < last && !steps[e + 1].fg.empty()) ++e;
        if (e == last) return; // single cluster left
        size_t n = e + 1;
        while (steps[n].fg.empty()) ++n;
        if (e - first + 1 <= n - e - 1 || foreign_cluster(bin, walk, first, e, false)) {
            first = n;
            continue;
        }

        size_t b = last;
        while (b > first && !steps[b - 1].fg.empty()) --b;
        size_t p = b - 1;
        while (steps[p].fg.empty()) --p;
        if (last - b + 1 <= b - p - 1 || foreign_cluster(bin, walk, b, last, true)) {
            last = p;
            continue;
        }
        return;
    }
}

/// Total-least-squares line through the pixels: the principal axis of their
/// scatter, in normal form.
LineEq fit_line(const PixelList& pts) {
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += double(x);
        my += double(y);
    }
    mx /= double(pts.size());
    my /= double(pts.size());
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        const double dx = double(x) - mx;
        const double dy = double(y) - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    const double dir = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    LineEq eq;
    eq.c = -std::sin(dir);
    eq.s = std::cos(dir);
    eq.rho = mx * eq.c + my * eq.s;
    return eq;
}

} // namespace

std::vector<LineSegment> hough_segments(const BinaryImage& bin, const HoughParams& params) {
    if (params.rho_res <= 0.0 || params.theta_res_deg <= 0.0 || params.votes < 2 ||
        params.min_len <= 0.0 || params.max_gap < 0.0)
        throw ConfigError("hough_segments: invalid parameters");
    if (bin.width() == 0 || bin.height() == 0) return {};

    HoughGrid g = build_grid(bin, params);
    BinaryImage work = bin;
    std::vector<LineSegment> out;
    size_t next_id = 1;

    // The consumption band is wider than the one-pixel support probe: a
    // stroke thicker than the probe window otherwise leaves its far edge
    // rows behind, and those crumbs re-peak at a neighboring bin and walk
    // out a near-parallel duplicate of the whole stroke.
    constexpr int64_t kConsumeBand = 4;

    const auto collect = [](const Walk& walk, size_t first, size_t last) {
        PixelList pts;
        for (size_t i = first; i <= last; ++i)
            pts.insert(pts.end(), walk.steps[i].fg.begin(), walk.steps[i].fg.end());
        return pts;
    };

    for (;;) {
        const Peak peak = find_peak(g, params.votes);
        if (peak.t < 0) break;

        LineEq bin_line;
        bin_line.c = g.cos_t[peak.t];
        bin_line.s = g.sin_t[peak.t];
        bin_line.rho = double(peak.r - g.rho_offset) * g.rho_res;

        // Runs are measured on the input raster, not the working copy, so a
        // segment always spans its full physical ink even where an earlier
        // walk already consumed shared pixels (junctions). Consumption only
        // clears working pixels, which is what guarantees termination.
        const Walk walk = walk_line(bin, bin_line);
        size_t consumed = 0;

        for (auto [first, last] : support_runs(walk.steps, params.max_gap)) {
            trim_run(bin, walk, first, last);
            if (distance(walk.steps[first].ideal, walk.steps[last].ideal) < params.min_len)
                continue;

            // Accumulator quantization can hand out a line tilted a whole
            // theta step against the ink, or one that aliases two parallel
            // strokes into a single bin; its runs then cover the ink
            // obliquely and truncated. Refitting the run's own support and
            // retracing recovers the stroke's direction and full extent.
            const Walk* src = &walk;
            size_t f = first, l = last;
            Walk refit;
            for (int pass = 0; pass < 3; ++pass) {
                Walk traced = walk_line(bin, fit_line(collect(*src, f, l)));
                const auto runs = support_runs(traced.steps, params.max_gap);
                if (runs.empty()) break;

                // Keep the run the previous run's midpoint projects into,
                // measured along the new walk's major axis.
                const Point& pa = src->steps[f].ideal;
                const Point& pb = src->steps[l].ideal;
                const double mid = traced.along_x ? (pa.x + pb.x) / 2.0 : (pa.y + pb.y) / 2.0;
                auto axis = [&](size_t i) {
                    const Point& q = traced.steps[i].ideal;
                    return traced.along_x ? q.x : q.y;
                };
                size_t pick = 0;
                double best = std::numeric_limits<double>::max();
                for (size_t i = 0; i < runs.size(); ++i) {
                    const double lo = axis(runs[i].first), hi = axis(runs[i].second);
                    const double d = std::max({lo - mid, mid - hi, 0.0});
                    if (d < best) {
                        best = d;
                        pick = i;
                    }
                }
                size_t nf = runs[pick].first, nl = runs[pick].second;
                trim_run(bin, traced, nf, nl);
                const bool same = !refit.steps.empty() &&
                                  traced.steps[nf].ideal == src->steps[f].ideal &&
                                  traced.steps[nl].ideal == src->steps[l].ideal;
                refit = std::move(traced);
                f = nf;
                l = nl;
                src = &refit;
                if (same) break;
            }
            if (refit.steps.empty()) continue;

            const Point a = src->steps[f].ideal;
            const Point b = src->steps[l].ideal;
            if (distance(a, b) < params.min_len) continue;

            // A run whose support is fully consumed was already emitted by an
            // earlier walk over the same ink; re-emitting adds an exact twin.
            bool live = false;
            for (size_t i = f; i <= l && !live; ++i)
                for (const auto& [px, py] : src->steps[i].fg)
                    if (work.at(px, py)) {
                        live = true;
                        break;
                    }
            if (!live) continue;

            out.push_back(make_segment("Line-" + std::to_string(next_id), a, b));
            ++next_id;
            for (size_t i = f; i <= l; ++i) {
                const Point& q = src->steps[i].ideal;
                const int64_t major = int64_t(src->along_x ? q.x : q.y);
                const int64_t minor = std::llround(src->along_x ? q.y : q.x);
                for (int64_t k = -kConsumeBand; k <= kConsumeBand; ++k) {
                    const int64_t px = src->along_x ? major : minor + k;
                    const int64_t py = src->along_x ? minor + k : major;
                    if (!work.in_bounds(px, py) || !work.at(uint32_t(px), uint32_t(py)))
                        continue;
                    work.set(uint32_t(px), uint32_t(py), false);
                    unvote(g, uint32_t(px), uint32_t(py));
                    ++consumed;
                }
            }
        }

        // A peak that yields nothing will never yield anything later either
        // (pixels are only ever removed), so retire it.
        if (consumed == 0) g.dead[size_t(peak.t) * g.n_rho + peak.r] = 1;
    }
    return out;
}

namespace {

bool seg_less(const LineSegment& a, const LineSegment& b) {
    if (a.p1.y != b.p1.y) return a.p1.y < b.p1.y;
    if (a.p1.x != b.p1.x) return a.p1.x < b.p1.x;
    if (a.p2.y != b.p2.y) return a.p2.y < b.p2.y;
    if (a.p2.x != b.p2.x) return a.p2.x < b.p2.x;
    return a.id < b.id;
}

double angle_diff(double a, double b) {
    double d = std::abs(a - b);
    if (d > 90.0) d = 180.0 - d;
    return d;
}

double point_line_dist(const Point& p, const LineSegment& s) {
    const double dx = s.p2.x - s.p1.x;
    const double dy = s.p2.y - s.p1.y;
    return std::abs(dy * (p.x - s.p1.x) - dx * (p.y - s.p1.y)) / s.length;
}

bool collinear_close(const LineSegment& a, const LineSegment& b, const MergeParams& p) {
    if (angle_diff(a.angle_deg, b.angle_deg) > p.angle_tol_deg) return false;
    const double off = std::max(
        std::max(point_line_dist(b.p1, a), point_line_dist(b.p2, a)),
        std::max(point_line_dist(a.p1, b), point_line_dist(a.p2, b)));
    if (off > p.offset_tol) return false;

    // Gap along segment a's direction between the two projected intervals.
    const double ux = (a.p2.x - a.p1.x) / a.length;
    const double uy = (a.p2.y - a.p1.y) / a.length;
    auto proj = [&](const Point& q) { return (q.x - a.p1.x) * ux + (q.y - a.p1.y) * uy; };
    const double a_lo = std::min(proj(a.p1), proj(a.p2));
    const double a_hi = std::max(proj(a.p1), proj(a.p2));
    const double b_lo = std::min(proj(b.p1), proj(b.p2));
    const double b_hi = std::max(proj(b.p1), proj(b.p2));
    const double gap = std::max(a_lo, b_lo) - std::min(a_hi, b_hi);
    return gap <= p.gap_tol;
}

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
        parent[b] = a; // smaller index wins: keeps cluster roots deterministic
    }
};

LineSegment fuse(const std::vector<const LineSegment*>& members) {
    if (members.size() == 1) return *members[0];

    // Length-weighted mean direction via doubled angles (direction is a
    // 180-degree-periodic quantity).
    double sc = 0.0, ss = 0.0, wsum = 0.0;
    double cx = 0.0, cy = 0.0;
    for (const LineSegment* m : members) {
        const double a2 = 2.0 * m->angle_deg * kDegToRad;
        sc += m->length * std::cos(a2);
        ss += m->length * std::sin(a2);
        cx += m->length * (m->p1.x + m->p2.x) / 2.0;
        cy += m->length * (m->p1.y + m->p2.y) / 2.0;
        wsum += m->length;
    }
    cx /= wsum;
    cy /= wsum;
    double ang = std::atan2(ss, sc) / 2.0;
    const double ux = std::cos(ang);
    const double uy = std::sin(ang);

    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const LineSegment* m : members) {
        for (const Point* q : {&m->p1, &m->p2}) {
            const double t = (q->x - cx) * ux + (q->y - cy) * uy;
            if (first) {
                lo = hi = t;
                first = false;
            } else {
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
        }
    }
    return make_segment(members[0]->id, {cx + lo * ux, cy + lo * uy},
                        {cx + hi * ux, cy + hi * uy});
}

} // namespace

std::vector<LineSegment> merge_segments(std::vector<LineSegment> segs, const MergeParams& params) {
    if (params.angle_tol_deg < 0.0 || params.offset_tol < 0.0 || params.gap_tol < 0.0)
        throw ConfigError("merge_segments: tolerances must be non-negative");

    for (;;) {
        std::sort(segs.begin(), segs.end(), seg_less);
        const size_t n = segs.size();
        if (n < 2) break;

        UnionFind uf(n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                if (collinear_close(segs[i], segs[j], params)) uf.unite(i, j);

        std::vector<std::vector<const LineSegment*>> clusters(n);
        for (size_t i = 0; i < n; ++i) clusters[uf.find(i)].push_back(&segs[i]);

        std::vector<LineSegment> merged;
        bool changed = false;
        for (const auto& c : clusters) {
            if (c.empty()) continue;
            if (c.size() > 1) changed = true;
            merged.push_back(fuse(c));
        }
        segs = std::move(merged);
        if (!changed) break;
    }

    std::sort(segs.begin(), segs.end(), seg_less);
    for (size_t i = 0; i < segs.size(); ++i) segs[i].id = "Line-" + std::to_string(i + 1);
    return segs;
}

} // namespace pidtwin
