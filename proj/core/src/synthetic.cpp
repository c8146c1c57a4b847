#include "pidtwin/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "pidtwin/crossings.hpp"
#include "pidtwin/errors.hpp"

namespace pidtwin {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// mt19937_64 output is specified by the standard, so everything derived from
// it here is reproducible across platforms as long as no std:: distribution
// is involved.
uint64_t bounded(std::mt19937_64& rng, uint64_t n) {
    if (n == 0) return 0;
    return rng() % n;
}

template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

struct Canvas {
    PlanImage img;
    Point pivot{0.0, 0.0};
    double c = 1.0, s = 0.0;
    bool rotated = false;

    Canvas(uint32_t w, uint32_t h, std::string id)
        : img(PlanImage::filled(w, h, 255, std::move(id))),
          pivot{(w - 1) / 2.0, (h - 1) / 2.0} {}

    void set_rotation(double deg) {
        rotated = deg != 0.0;
        c = std::cos(deg * kDegToRad);
        s = std::sin(deg * kDegToRad);
    }

    Point map(const Point& p) const {
        if (!rotated) return p;
        const double dx = p.x - pivot.x;
        const double dy = p.y - pivot.y;
        return {pivot.x + c * dx - s * dy, pivot.y + s * dx + c * dy};
    }

    /// Butt-capped thick stroke between the mapped endpoints.
    void stroke(Point a, Point b, double width) {
        a = map(a);
        b = map(b);
        const double len = distance(a, b);
        if (len == 0.0) return;
        const double ux = (b.x - a.x) / len;
        const double uy = (b.y - a.y) / len;
        const double half = width / 2.0;

        const int x0 = int(std::floor(std::min(a.x, b.x) - half));
        const int x1 = int(std::ceil(std::max(a.x, b.x) + half));
        const int y0 = int(std::floor(std::min(a.y, b.y) - half));
        const int y1 = int(std::ceil(std::max(a.y, b.y) + half));
        for (int y = std::max(0, y0); y <= std::min(int(img.height()) - 1, y1); ++y) {
            for (int x = std::max(0, x0); x <= std::min(int(img.width()) - 1, x1); ++x) {
                const double t = (x - a.x) * ux + (y - a.y) * uy;
                if (t < 0.0 || t > len) continue;
                const double perp = std::abs((x - a.x) * uy - (y - a.y) * ux);
                if (perp <= half) img.set(uint32_t(x), uint32_t(y), 0);
            }
        }
    }

    void circle(Point center, double r, double width) {
        center = map(center);
        const double half = width / 2.0;
        const int x0 = int(std::floor(center.x - r - half));
        const int x1 = int(std::ceil(center.x + r + half));
        const int y0 = int(std::floor(center.y - r - half));
        const int y1 = int(std::ceil(center.y + r + half));
        for (int y = std::max(0, y0); y <= std::min(int(img.height()) - 1, y1); ++y) {
            for (int x = std::max(0, x0); x <= std::min(int(img.width()) - 1, x1); ++x) {
                const double d = std::hypot(x - center.x, y - center.y);
                if (std::abs(d - r) <= half) img.set(uint32_t(x), uint32_t(y), 0);
            }
        }
    }
};

/// Half edge length of the glyph box drawn for a symbol.
uint32_t glyph_half(uint32_t cell_px) { return std::max<uint32_t>(10, cell_px / 5); }

void draw_glyph(Canvas& cv, const std::string& cls, const Point& center, double half) {
    const double w = 2.0;
    const double in = half - 1.0; // keep the stroke inside the declared box
    const Point tl{center.x - in, center.y - in};
    const Point tr{center.x + in, center.y - in};
    const Point bl{center.x - in, center.y + in};
    const Point br{center.x + in, center.y + in};

    if (cls == "Pump") {
        cv.circle(center, in, w);
        cv.stroke({center.x - in * 0.5, center.y - in * 0.6}, {center.x + in * 0.7, center.y},
                  w);
        cv.stroke({center.x - in * 0.5, center.y + in * 0.6}, {center.x + in * 0.7, center.y},
                  w);
    } else if (cls == "Valve") {
        cv.stroke(tl, bl, w);
        cv.stroke(tr, br, w);
        cv.stroke(tl, center, w);
        cv.stroke(bl, center, w);
        cv.stroke(tr, center, w);
        cv.stroke(br, center, w);
    } else if (cls == "HeatExchanger") {
        cv.stroke(tl, tr, w);
        cv.stroke(tr, br, w);
        cv.stroke(br, bl, w);
        cv.stroke(bl, tl, w);
        cv.stroke(tl, br, w);
        cv.stroke(bl, tr, w);
    } else if (cls == "Flap") {
        cv.stroke(tl, tr, w);
        cv.stroke(tr, br, w);
        cv.stroke(br, bl, w);
        cv.stroke(bl, tl, w);
        cv.stroke(bl, tr, w);
    } else {
        cv.stroke(tl, tr, w);
        cv.stroke(tr, br, w);
        cv.stroke(br, bl, w);
        cv.stroke(bl, tl, w);
        cv.stroke({center.x, center.y - in}, {center.x, center.y + in}, w);
    }
}

using Cell = std::pair<int, int>; // (col, row)

Cell cell_of(const GridPos& p) { return {p.col, p.row}; }

bool on_path(const LayoutConduit& c, const Cell& p) {
    const int lo_c = std::min(c.from.col, c.to.col), hi_c = std::max(c.from.col, c.to.col);
    const int lo_r = std::min(c.from.row, c.to.row), hi_r = std::max(c.from.row, c.to.row);
    return p.first >= lo_c && p.first <= hi_c && p.second >= lo_r && p.second <= hi_r;
}

bool is_endpoint(const LayoutConduit& c, const Cell& p) {
    return p == cell_of(c.from) || p == cell_of(c.to);
}

void validate_layout(const LayoutSpec& spec) {
    auto in_grid = [&](const GridPos& p) {
        return p.col >= 0 && p.col < spec.cols && p.row >= 0 && p.row < spec.rows;
    };
    if (spec.cols < 1 || spec.rows < 1) throw InfeasibleLayout("layout: empty grid");
    if (spec.cell_px == 0) throw InfeasibleLayout("layout: zero cell pitch");

    std::set<Cell> taken;
    for (const auto& s : spec.symbols) {
        if (s.cls.empty()) throw InfeasibleLayout("layout: symbol with empty class");
        if (!in_grid(s.at)) throw InfeasibleLayout("layout: symbol cell outside the grid");
        if (!taken.insert(cell_of(s.at)).second)
            throw InfeasibleLayout("layout: two symbols share a cell");
    }
    for (const auto& c : spec.conduits) {
        if (!in_grid(c.from) || !in_grid(c.to))
            throw InfeasibleLayout("layout: conduit endpoint outside the grid");
        if (c.from == c.to) throw InfeasibleLayout("layout: zero-length conduit");
        if (c.from.col != c.to.col && c.from.row != c.to.row)
            throw InfeasibleLayout("layout: conduits must be axis aligned");
    }
    // Parallel conduits on the same line must not share more than a point.
    for (size_t i = 0; i < spec.conduits.size(); ++i) {
        for (size_t j = i + 1; j < spec.conduits.size(); ++j) {
            const auto& a = spec.conduits[i];
            const auto& b = spec.conduits[j];
            const bool ah = a.from.row == a.to.row, bh = b.from.row == b.to.row;
            if (ah != bh) continue;
            if (ah) {
                if (a.from.row != b.from.row) continue;
                const int lo = std::max(std::min(a.from.col, a.to.col),
                                        std::min(b.from.col, b.to.col));
                const int hi = std::min(std::max(a.from.col, a.to.col),
                                        std::max(b.from.col, b.to.col));
                if (hi > lo) throw InfeasibleLayout("layout: overlapping conduits");
            } else {
                if (a.from.col != b.from.col) continue;
                const int lo = std::max(std::min(a.from.row, a.to.row),
                                        std::min(b.from.row, b.to.row));
                const int hi = std::min(std::max(a.from.row, a.to.row),
                                        std::max(b.from.row, b.to.row));
                if (hi > lo) throw InfeasibleLayout("layout: overlapping conduits");
            }
        }
    }
}

/// Grid node: a cut point plus an owner tag. Shared nodes (tag -1) join the
/// conduits that meet there; private nodes keep dead ends apart.
using Node = std::tuple<int, int, int>;

struct AbstractTruth {
    std::map<Node, std::vector<Node>> adj;
    std::map<Cell, size_t> symbol_at;       // cell -> index into spec.symbols
    std::vector<Cell> crossover_cells;      // meeting points with 4+ rays
};

AbstractTruth build_truth(const LayoutSpec& spec) {
    AbstractTruth truth;
    for (size_t i = 0; i < spec.symbols.size(); ++i)
        truth.symbol_at[cell_of(spec.symbols[i].at)] = i;

    // Candidate meeting points: conduit endpoints and crossings of
    // perpendicular pairs.
    std::set<Cell> candidates;
    for (const auto& c : spec.conduits) {
        candidates.insert(cell_of(c.from));
        candidates.insert(cell_of(c.to));
    }
    for (size_t i = 0; i < spec.conduits.size(); ++i) {
        for (size_t j = i + 1; j < spec.conduits.size(); ++j) {
            const auto& a = spec.conduits[i];
            const auto& b = spec.conduits[j];
            const bool ah = a.from.row == a.to.row;
            if (ah == (b.from.row == b.to.row)) continue;
            const auto& h = ah ? a : b;
            const auto& v = ah ? b : a;
            const Cell p{v.from.col, h.from.row};
            if (on_path(h, p) && on_path(v, p)) candidates.insert(p);
        }
    }

    // Classify each meeting point by its departing ray count: a conduit
    // ending there contributes one ray, one passing through contributes two.
    // Two or three rays join the incident conduits, four or more do not
    // (the crossover rule); a symbol on the point always claims it.
    std::map<Cell, bool> joins;
    for (const Cell& p : candidates) {
        int rays = 0;
        for (const auto& c : spec.conduits) {
            if (!on_path(c, p)) continue;
            rays += is_endpoint(c, p) ? 1 : 2;
        }
        const bool symbol_here = truth.symbol_at.count(p) > 0;
        const bool connective = rays == 2 || rays == 3;
        joins[p] = symbol_here || connective;
        if (!symbol_here && rays >= 4) truth.crossover_cells.push_back(p);
    }

    // Cut every conduit at its endpoints, at joining meeting points, and at
    // symbols on its path; link consecutive cuts.
    for (size_t ci = 0; ci < spec.conduits.size(); ++ci) {
        const auto& c = spec.conduits[ci];
        std::vector<Cell> cuts{cell_of(c.from), cell_of(c.to)};
        for (const auto& [p, join] : joins)
            if (join && on_path(c, p)) cuts.push_back(p);
        for (const auto& [p, idx] : truth.symbol_at)
            if (on_path(c, p)) cuts.push_back(p);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        auto node_for = [&](const Cell& p) -> Node {
            if (truth.symbol_at.count(p) || joins[p]) return {p.first, p.second, -1};
            return {p.first, p.second, int(ci)};
        };
        for (size_t k = 0; k + 1 < cuts.size(); ++k) {
            const Node a = node_for(cuts[k]);
            const Node b = node_for(cuts[k + 1]);
            truth.adj[a].push_back(b);
            truth.adj[b].push_back(a);
        }
    }
    return truth;
}

} // namespace

SyntheticPlan generate_synthetic_plan(const LayoutSpec& spec, uint64_t seed) {
    validate_layout(spec);

    const uint32_t cell = spec.cell_px;
    const uint32_t width = 2 * spec.margin_px + uint32_t(std::max(0, spec.cols - 1)) * cell + 1;
    const uint32_t height = 2 * spec.margin_px + uint32_t(std::max(0, spec.rows - 1)) * cell + 1;
    auto pixel = [&](const GridPos& p) -> Point {
        return {double(spec.margin_px) + double(p.col) * cell,
                double(spec.margin_px) + double(p.row) * cell};
    };

    Canvas cv(width, height, spec.plan_id);
    cv.set_rotation(spec.skew_deg);
    for (const auto& c : spec.conduits)
        cv.stroke(pixel(c.from), pixel(c.to), double(spec.line_px));
    const double half = double(glyph_half(cell));
    for (const auto& s : spec.symbols) draw_glyph(cv, s.cls, pixel(s.at), half);

    if (spec.noise > 0.0) {
        std::mt19937_64 rng(seed);
        const uint64_t flips = uint64_t(std::llround(spec.noise * double(width) * height));
        for (uint64_t i = 0; i < flips; ++i) {
            const uint32_t x = uint32_t(bounded(rng, width));
            const uint32_t y = uint32_t(bounded(rng, height));
            cv.img.set(x, y, bounded(rng, 2) ? 0 : 255);
        }
    }

    // Ground-truth symbols: ids assigned in the pre-skew reading order, boxes
    // widened to the rotated glyph boxes' bounds afterwards.
    std::vector<SymbolDetection> dets;
    for (const auto& s : spec.symbols) {
        const Point c = pixel(s.at);
        SymbolDetection d;
        d.cls = s.cls;
        d.bbox = {c.x - half, c.y - half, c.x + half, c.y + half};
        dets.push_back(std::move(d));
    }
    dets = assign_ids(std::move(dets));

    std::map<Cell, std::string> id_at;
    std::vector<std::string> ids;
    for (auto& d : dets) {
        const Point c = d.bbox.center();
        const Cell cellpos{int(std::llround((c.x - spec.margin_px) / cell)),
                           int(std::llround((c.y - spec.margin_px) / cell))};
        id_at[cellpos] = d.id;
        ids.push_back(d.id);
        if (cv.rotated) {
            const Point corners[4] = {cv.map({d.bbox.x_min, d.bbox.y_min}),
                                      cv.map({d.bbox.x_max, d.bbox.y_min}),
                                      cv.map({d.bbox.x_min, d.bbox.y_max}),
                                      cv.map({d.bbox.x_max, d.bbox.y_max})};
            BoundingBox b{corners[0].x, corners[0].y, corners[0].x, corners[0].y};
            for (const Point& q : corners) {
                b.x_min = std::min(b.x_min, q.x);
                b.y_min = std::min(b.y_min, q.y);
                b.x_max = std::max(b.x_max, q.x);
                b.y_max = std::max(b.y_max, q.y);
            }
            d.bbox = b;
        }
    }

    const AbstractTruth truth = build_truth(spec);
    ConnectionMatrix matrix(ids);
    for (const auto& [cellpos, si] : truth.symbol_at) {
        const Node start{cellpos.first, cellpos.second, -1};
        if (!truth.adj.count(start)) continue;
        const auto i0 = matrix.index_of(id_at.at(cellpos));

        std::set<Node> visited{start};
        std::deque<Node> queue{start};
        while (!queue.empty()) {
            const Node n = queue.front();
            queue.pop_front();
            for (const Node& m : truth.adj.at(n)) {
                if (!visited.insert(m).second) continue;
                const Cell mc{std::get<0>(m), std::get<1>(m)};
                const auto hit = truth.symbol_at.find(mc);
                if (std::get<2>(m) == -1 && hit != truth.symbol_at.end()) {
                    const auto j = matrix.index_of(id_at.at(mc));
                    if (i0 && j && *i0 != *j) matrix.set(*i0, *j);
                    continue; // symbols block the walk
                }
                queue.push_back(m);
            }
        }
    }

    SyntheticPlan plan;
    plan.image = std::move(cv.img);
    plan.symbols = std::move(dets);
    plan.truth = std::move(matrix);
    for (const Cell& p : truth.crossover_cells)
        plan.crossing_points.push_back(cv.map(pixel({p.first, p.second})));
    std::vector<LineSegment> segs;
    for (size_t i = 0; i < spec.conduits.size(); ++i)
        segs.push_back(make_segment("Line-" + std::to_string(i + 1),
                                    cv.map(pixel(spec.conduits[i].from)),
                                    cv.map(pixel(spec.conduits[i].to))));
    std::sort(segs.begin(), segs.end(), [](const LineSegment& a, const LineSegment& b) {
        if (a.p1.y != b.p1.y) return a.p1.y < b.p1.y;
        if (a.p1.x != b.p1.x) return a.p1.x < b.p1.x;
        if (a.p2.y != b.p2.y) return a.p2.y < b.p2.y;
        return a.p2.x < b.p2.x;
    });
    for (size_t i = 0; i < segs.size(); ++i) segs[i].id = "Line-" + std::to_string(i + 1);
    plan.conduit_segments = std::move(segs);
    return plan;
}

LayoutSpec random_layout(const RandomLayoutParams& params, uint64_t seed) {
    if (params.symbol_count < 1) throw InfeasibleLayout("random_layout: need a symbol");
    if (params.rows < 3) throw InfeasibleLayout("random_layout: need at least 3 rows");
    int bars = params.crossover_bars;
    int stubs = std::max(0, params.extra_stubs);
    if (params.symbol_count + stubs + bars > params.cols)
        throw InfeasibleLayout("random_layout: grid too narrow for the requested content");
    if (bars > 0 && params.symbol_count < 2)
        bars = 0; // a bar needs a bus span to cross

    std::mt19937_64 rng(seed);
    LayoutSpec spec;
    spec.cols = params.cols;
    spec.rows = params.rows;
    spec.cell_px = params.cell_px;
    spec.margin_px = params.margin_px;

    const int groups = 1 + int(bounded(rng, uint64_t(std::min(3, params.symbol_count))));
    std::vector<int> group_syms(groups, 1);
    for (int k = params.symbol_count - groups; k > 0; --k)
        ++group_syms[bounded(rng, uint64_t(groups))];
    std::vector<int> group_stubs(groups, 0);
    for (int k = 0; k < stubs; ++k) ++group_stubs[bounded(rng, uint64_t(groups))];
    std::vector<int> group_bars(groups, 0);
    // Bars go to a group wide enough to have an interior column.
    int bar_group = -1;
    for (int gi = 0; gi < groups; ++gi)
        if (group_syms[gi] >= 2) bar_group = gi;
    if (bar_group >= 0) group_bars[bar_group] = bars;

    // Slack columns spread as random padding before/between/after the bands.
    int total = 0;
    for (int gi = 0; gi < groups; ++gi)
        total += group_syms[gi] + group_stubs[gi] + group_bars[gi];
    std::vector<int> pads(groups + 1, 0);
    for (int k = params.cols - total; k > 0; --k) ++pads[bounded(rng, uint64_t(groups + 1))];

    const auto classes = ClassRegistry::defaults().names();
    int c0 = 0;
    for (int gi = 0; gi < groups; ++gi) {
        c0 += pads[gi];
        const int width = group_syms[gi] + group_stubs[gi] + group_bars[gi];
        std::vector<int> cols(width);
        for (int k = 0; k < width; ++k) cols[k] = c0 + k;
        c0 += width;

        // Bars take interior columns so the bus always spans across them.
        std::vector<int> bar_cols;
        if (group_bars[gi] > 0) {
            std::vector<int> interior(cols.begin() + 1, cols.end() - 1);
            shuffle_vec(interior, rng);
            bar_cols.assign(interior.begin(), interior.begin() + group_bars[gi]);
        }
        std::vector<int> used;
        for (int col : cols)
            if (std::find(bar_cols.begin(), bar_cols.end(), col) == bar_cols.end())
                used.push_back(col);
        shuffle_vec(used, rng);

        const int bus_row = 1 + int(bounded(rng, uint64_t(params.rows - 2)));
        const int max_up = bus_row;
        const int max_down = params.rows - 1 - bus_row;
        auto branch_row = [&]() {
            const bool up = bounded(rng, 2) == 0;
            const int reach = up ? max_up : max_down;
            const int off = 1 + int(bounded(rng, uint64_t(reach)));
            return up ? bus_row - off : bus_row + off;
        };

        for (int k = 0; k < group_syms[gi]; ++k) {
            const int col = used[size_t(k)];
            const GridPos at{col, branch_row()};
            spec.symbols.push_back({classes[bounded(rng, classes.size())], at});
            spec.conduits.push_back({{col, bus_row}, at});
        }
        for (int k = 0; k < group_stubs[gi]; ++k) {
            const int col = used[size_t(group_syms[gi] + k)];
            spec.conduits.push_back({{col, bus_row}, {col, branch_row()}});
        }
        if (used.size() >= 2) {
            const auto [lo, hi] = std::minmax_element(used.begin(), used.end());
            spec.conduits.push_back({{*lo, bus_row}, {*hi, bus_row}});
        }
        for (int col : bar_cols) {
            const int up = 1 + int(bounded(rng, uint64_t(max_up)));
            const int down = 1 + int(bounded(rng, uint64_t(max_down)));
            spec.conduits.push_back({{col, bus_row - up}, {col, bus_row + down}});
        }
    }
    return spec;
}

Template render_template(const std::string& cls, uint32_t box_px) {
    if (cls.empty()) throw Error("render_template: empty class name");
    if (box_px < 8) throw Error("render_template: box too small");
    Canvas cv(box_px, box_px, "template-" + cls);
    const double center = (box_px - 1) / 2.0;
    draw_glyph(cv, cls, {center, center}, center);
    Template t;
    t.cls = cls;
    t.mask = binarize(cv.img);
    return t;
}

std::vector<Template> reference_templates(uint32_t box_px) {
    std::vector<Template> out;
    const ClassRegistry registry = ClassRegistry::defaults();
    for (const auto& cls : registry.names()) out.push_back(render_template(cls, box_px));
    return out;
}

namespace {

double point_seg_dist(const Point& p, const LineSegment& s) {
    const double ux = (s.p2.x - s.p1.x) / s.length;
    const double uy = (s.p2.y - s.p1.y) / s.length;
    const double t = std::clamp((p.x - s.p1.x) * ux + (p.y - s.p1.y) * uy, 0.0, s.length);
    return std::hypot(p.x - (s.p1.x + t * ux), p.y - (s.p1.y + t * uy));
}

double seg_seg_dist(const LineSegment& a, const LineSegment& b) {
    if (intersect(a, b, 0.0)) return 0.0;
    return std::min(std::min(point_seg_dist(a.p1, b), point_seg_dist(a.p2, b)),
                    std::min(point_seg_dist(b.p1, a), point_seg_dist(b.p2, a)));
}

} // namespace

LineField generate_line_field(const LineFieldSpec& spec, uint64_t seed) {
    if (spec.width < 32 || spec.height < 32)
        throw InfeasibleLayout("line field: canvas too small");
    if (spec.line_count < 0 || spec.min_len <= 0.0)
        throw InfeasibleLayout("line field: invalid parameters");

    std::mt19937_64 rng(seed);
    const double margin = 4.0 + spec.line_px;
    const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};

    std::vector<LineSegment> lines;
    uint64_t attempts = 0;
    const uint64_t max_attempts = 4000ull * uint64_t(spec.line_count + 1);
    while (int(lines.size()) < spec.line_count) {
        if (++attempts > max_attempts)
            throw InfeasibleLayout("line field: could not place the requested lines");
        const int(&d)[2] = dirs[bounded(rng, 4)];
        const int x = int(margin) + int(bounded(rng, uint64_t(spec.width - 2 * margin)));
        const int y = int(margin) + int(bounded(rng, uint64_t(spec.height - 2 * margin)));

        // Longest step count that keeps the far endpoint inside the margins.
        int tmax = std::numeric_limits<int>::max();
        if (d[0] > 0) tmax = std::min(tmax, int(spec.width - 1 - margin) - x);
        if (d[1] > 0) tmax = std::min(tmax, int(spec.height - 1 - margin) - y);
        if (d[1] < 0) tmax = std::min(tmax, y - int(margin));
        const double step_len = (d[0] != 0 && d[1] != 0) ? std::numbers::sqrt2 : 1.0;
        const int tmin = int(std::ceil(spec.min_len / step_len));
        if (tmax < tmin) continue;

        const int t = tmin + int(bounded(rng, uint64_t(tmax - tmin + 1)));
        const Point p1{double(x), double(y)};
        const Point p2{double(x + t * d[0]), double(y + t * d[1])};
        const LineSegment seg = make_segment("", p1, p2);

        bool clear = true;
        for (const auto& other : lines) {
            if (seg_seg_dist(seg, other) < spec.min_separation + spec.line_px) {
                clear = false;
                break;
            }
        }
        if (clear) lines.push_back(seg);
    }

    std::sort(lines.begin(), lines.end(), [](const LineSegment& a, const LineSegment& b) {
        if (a.p1.y != b.p1.y) return a.p1.y < b.p1.y;
        if (a.p1.x != b.p1.x) return a.p1.x < b.p1.x;
        if (a.p2.y != b.p2.y) return a.p2.y < b.p2.y;
        return a.p2.x < b.p2.x;
    });
    for (size_t i = 0; i < lines.size(); ++i) lines[i].id = "Line-" + std::to_string(i + 1);

    Canvas cv(spec.width, spec.height, "line-field-" + std::to_string(seed));
    for (const auto& s : lines) cv.stroke(s.p1, s.p2, double(spec.line_px));

    LineField out;
    out.image = std::move(cv.img);
    out.truth = std::move(lines);
    return out;
}

} // namespace pidtwin
