#include "pidtwin/topology.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "pidtwin/errors.hpp"

namespace pidtwin {

ConnectionMatrix::ConnectionMatrix(std::vector<std::string> symbol_ids)
    : ids_(std::move(symbol_ids)), cells_(ids_.size() * ids_.size(), 0) {
    for (size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], i).second)
            throw Error("ConnectionMatrix: duplicate symbol id: " + ids_[i]);
    }
}

std::optional<size_t> ConnectionMatrix::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool ConnectionMatrix::at(size_t i, size_t j) const {
    if (i >= size() || j >= size()) throw Error("ConnectionMatrix::at: index out of range");
    return cells_[i * size() + j] != 0;
}

void ConnectionMatrix::set(size_t i, size_t j, bool connected) {
    if (i >= size() || j >= size()) throw Error("ConnectionMatrix::set: index out of range");
    if (i == j) throw Error("ConnectionMatrix::set: the diagonal stays false");
    cells_[i * size() + j] = connected ? 1 : 0;
    cells_[j * size() + i] = connected ? 1 : 0;
}

size_t ConnectionMatrix::edge_count() const {
    size_t n = 0;
    for (size_t i = 0; i < size(); ++i)
        for (size_t j = i + 1; j < size(); ++j)
            if (cells_[i * size() + j]) ++n;
    return n;
}

std::vector<std::pair<std::string, std::string>> ConnectionMatrix::edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (size_t i = 0; i < size(); ++i) {
        for (size_t j = i + 1; j < size(); ++j) {
            if (!cells_[i * size() + j]) continue;
            auto a = ids_[i];
            auto b = ids_[j];
            if (b < a) std::swap(a, b);
            out.emplace_back(std::move(a), std::move(b));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::pair<double, double>> clip_segment_to_box(const LineSegment& seg,
                                                             const BoundingBox& box) {
    const double ux = (seg.p2.x - seg.p1.x) / seg.length;
    const double uy = (seg.p2.y - seg.p1.y) / seg.length;

    double t0 = 0.0;
    double t1 = seg.length;
    const double p[4] = {-ux, ux, -uy, uy};
    const double q[4] = {seg.p1.x - box.x_min, box.x_max - seg.p1.x, seg.p1.y - box.y_min,
                         box.y_max - seg.p1.y};
    for (int k = 0; k < 4; ++k) {
        if (p[k] == 0.0) {
            if (q[k] < 0.0) return std::nullopt; // parallel to this edge, outside it
            continue;
        }
        const double t = q[k] / p[k];
        if (p[k] < 0.0) {
            if (t > t1) return std::nullopt;
            t0 = std::max(t0, t);
        } else {
            if (t < t0) return std::nullopt;
            t1 = std::min(t1, t);
        }
    }
    if (t0 > t1) return std::nullopt;
    return std::make_pair(t0, t1);
}

std::vector<LineSegment> lines_through_symbol(const SymbolDetection& sym,
                                              const std::vector<LineSegment>& segs,
                                              double inflate) {
    const BoundingBox box = sym.bbox.inflated(inflate);
    std::vector<LineSegment> out;
    for (const auto& s : segs)
        if (clip_segment_to_box(s, box)) out.push_back(s);
    return out;
}

namespace {

/// An element located on a line: its closed parameter interval along it.
struct OnLine {
    const PlanElement* el = nullptr;
    double lo = 0.0;
    double hi = 0.0;

    double mid() const { return (lo + hi) / 2.0; }
};

double along(const LineSegment& s, const Point& p) {
    const double ux = (s.p2.x - s.p1.x) / s.length;
    const double uy = (s.p2.y - s.p1.y) / s.length;
    return (p.x - s.p1.x) * ux + (p.y - s.p1.y) * uy;
}

/// Every element attached to the line: symbols by a non-empty clip of their
/// inflated box, crossings by incidence.
std::vector<OnLine> elements_on_line(const LineSegment& line,
                                     const std::vector<PlanElement>& elements,
                                     double inflate) {
    std::vector<OnLine> out;
    for (const auto& e : elements) {
        if (e.is_symbol()) {
            const auto clip = clip_segment_to_box(line, e.symbol().bbox.inflated(inflate));
            if (!clip) continue;
            out.push_back({&e, clip->first, clip->second});
        } else {
            const auto& c = e.crossing();
            if (std::find(c.incident.begin(), c.incident.end(), line.id) == c.incident.end())
                continue;
            const double t = along(line, c.at);
            out.push_back({&e, t, t});
        }
    }
    return out;
}

/// Nearest elements in one travel direction from a base interval; equidistant
/// elements are all retained. dir is +1 (increasing t) or -1.
std::vector<const PlanElement*> nearest_in_direction(const std::vector<OnLine>& on_line,
                                                     double base_lo, double base_hi,
                                                     double base_mid, int dir,
                                                     const std::string& skip_id) {
    double best = -1.0;
    std::vector<const PlanElement*> out;
    for (const auto& o : on_line) {
        if (o.el->id() == skip_id) continue;
        if (dir > 0 ? o.mid() < base_mid : o.mid() > base_mid) continue;
        const double d =
            dir > 0 ? std::max(0.0, o.lo - base_hi) : std::max(0.0, base_lo - o.hi);
        if (out.empty() || d < best) {
            best = d;
            out.assign(1, o.el);
        } else if (d == best) {
            out.push_back(o.el);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const PlanElement* a, const PlanElement* b) { return a->id() < b->id(); });
    return out;
}

} // namespace

std::vector<PlanElement> nearest_elements(const SymbolDetection& sym, const LineSegment& line,
                                          const std::vector<PlanElement>& elements,
                                          const DeriveParams& params) {
    const auto base = clip_segment_to_box(line, sym.bbox.inflated(params.attach_inflate));
    if (!base) return {};
    const auto on_line = elements_on_line(line, elements, params.attach_inflate);
    const double mid = (base->first + base->second) / 2.0;

    std::vector<PlanElement> out;
    for (int dir : {-1, +1})
        for (const PlanElement* e :
             nearest_in_direction(on_line, base->first, base->second, mid, dir, sym.id))
            out.push_back(*e);
    return out;
}

ConnectionMatrix derive_connections(const std::vector<SymbolDetection>& symbols,
                                    const std::vector<LineSegment>& segs,
                                    const std::vector<LineCrossing>& crossings,
                                    const DeriveParams& params) {
    std::vector<std::string> ids;
    ids.reserve(symbols.size());
    for (const auto& s : symbols) ids.push_back(s.id);
    ConnectionMatrix m(std::move(ids));

    std::vector<PlanElement> elements;
    elements.reserve(symbols.size() + crossings.size());
    for (const auto& s : symbols) elements.push_back({s});
    for (const auto& c : crossings) elements.push_back({c});

    // Per-line attachment lists, computed once.
    std::vector<std::vector<OnLine>> on_line(segs.size());
    for (size_t li = 0; li < segs.size(); ++li)
        on_line[li] = elements_on_line(segs[li], elements, params.attach_inflate);

    struct WalkState {
        size_t line = 0;
        double lo = 0.0, hi = 0.0;
        int dir = 0;
        std::string from; // element the search departs from
    };

    for (size_t root = 0; root < symbols.size(); ++root) {
        const SymbolDetection& sym = symbols[root];

        std::deque<WalkState> queue;
        std::set<std::tuple<std::string, size_t, int>> visited;
        for (size_t li = 0; li < segs.size(); ++li) {
            const auto base = clip_segment_to_box(segs[li], sym.bbox.inflated(params.attach_inflate));
            if (!base) continue;
            for (int dir : {-1, +1})
                queue.push_back({li, base->first, base->second, dir, sym.id});
        }

        while (!queue.empty()) {
            const WalkState st = queue.front();
            queue.pop_front();
            if (!visited.insert({st.from, st.line, st.dir}).second) continue;

            const double mid = (st.lo + st.hi) / 2.0;
            for (const PlanElement* e :
                 nearest_in_direction(on_line[st.line], st.lo, st.hi, mid, st.dir, st.from)) {
                if (e->is_symbol()) {
                    const auto idx = m.index_of(e->symbol().id);
                    if (idx && *idx != root) m.set(root, *idx);
                    continue;
                }
                const LineCrossing& c = e->crossing();
                const double tc = along(segs[st.line], c.at);
                if (c.connective) {
                    // Fan out along every incident line, both ways.
                    for (const auto& lid : c.incident) {
                        for (size_t li = 0; li < segs.size(); ++li) {
                            if (segs[li].id != lid) continue;
                            const double t = along(segs[li], c.at);
                            for (int dir : {-1, +1})
                                queue.push_back({li, t, t, dir, c.id});
                        }
                    }
                } else {
                    // Crossover: pass straight through on the same line.
                    queue.push_back({st.line, tc, tc, st.dir, c.id});
                }
            }
        }
    }
    return m;
}

TopologyGraph matrix_to_graph(const ConnectionMatrix& m,
                              const std::vector<SymbolDetection>& symbols) {
    TopologyGraph g;
    for (const auto& id : m.ids()) {
        const auto it = std::find_if(symbols.begin(), symbols.end(),
                                     [&](const SymbolDetection& s) { return s.id == id; });
        if (it == symbols.end())
            throw SymbolSetMismatch("matrix_to_graph: no symbol for matrix id " + id);
        g.nodes.push_back({it->id, it->cls, it->bbox});
    }
    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const TopologyGraph::Node& a, const TopologyGraph::Node& b) {
                  return a.id < b.id;
              });
    g.edges = m.edges();
    return g;
}

} // namespace pidtwin
