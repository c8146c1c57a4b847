#include "pidtwin/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "pidtwin/errors.hpp"
#include "pidtwin/lines.hpp"
#include "textio.hpp"

namespace pidtwin {

using nlohmann::json;
using nlohmann::ordered_json;

ClassRegistry ClassRegistry::defaults() {
    ClassRegistry r;
    r.add("Pump");
    r.add("Valve");
    r.add("HeatExchanger");
    r.add("Flap");
    return r;
}

void ClassRegistry::add(std::string name) {
    if (name.empty()) throw Error("ClassRegistry: empty class name");
    if (resolve(name)) throw Error("ClassRegistry: duplicate class name: " + name);
    names_.push_back(std::move(name));
}

std::optional<std::string> ClassRegistry::resolve(std::string_view name) const {
    const std::string needle = detail::to_lower(name);
    for (const auto& n : names_)
        if (detail::to_lower(n) == needle) return n;
    return std::nullopt;
}

namespace {

bool det_less(const SymbolDetection& a, const SymbolDetection& b) {
    if (a.score != b.score) return a.score > b.score; // strongest first
    if (!(a.bbox == b.bbox)) return bbox_less(a.bbox, b.bbox);
    if (a.cls != b.cls) return a.cls < b.cls;
    return a.id < b.id;
}

struct MaskVariant {
    uint32_t w = 0;
    uint32_t h = 0;
    std::vector<std::pair<uint32_t, uint32_t>> ink;
};

BinaryImage rotate90(const BinaryImage& src) {
    // Clockwise quarter turn: (x, y) -> (h - 1 - y, x).
    BinaryImage out(src.height(), src.width());
    for (uint32_t y = 0; y < src.height(); ++y)
        for (uint32_t x = 0; x < src.width(); ++x)
            if (src.at(x, y)) out.set(src.height() - 1 - y, x, true);
    return out;
}

BinaryImage rescale(const BinaryImage& src, double s) {
    const uint32_t w = std::max<uint32_t>(1, uint32_t(std::lround(src.width() * s)));
    const uint32_t h = std::max<uint32_t>(1, uint32_t(std::lround(src.height() * s)));
    BinaryImage out(w, h);
    for (uint32_t y = 0; y < h; ++y) {
        const uint32_t sy = std::min(src.height() - 1, uint32_t(uint64_t(y) * src.height() / h));
        for (uint32_t x = 0; x < w; ++x) {
            const uint32_t sx = std::min(src.width() - 1, uint32_t(uint64_t(x) * src.width() / w));
            if (src.at(sx, sy)) out.set(x, y, true);
        }
    }
    return out;
}

MaskVariant to_variant(const BinaryImage& mask) {
    MaskVariant v;
    v.w = mask.width();
    v.h = mask.height();
    for (uint32_t y = 0; y < mask.height(); ++y)
        for (uint32_t x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) v.ink.emplace_back(x, y);
    return v;
}

/// Summed-area table, (w+1) x (h+1), for O(1) window ink counts.
std::vector<uint64_t> integral(const BinaryImage& b) {
    const size_t w = b.width(), h = b.height();
    std::vector<uint64_t> acc((w + 1) * (h + 1), 0);
    for (size_t y = 0; y < h; ++y) {
        uint64_t row = 0;
        for (size_t x = 0; x < w; ++x) {
            row += b.at(uint32_t(x), uint32_t(y)) ? 1 : 0;
            acc[(y + 1) * (w + 1) + (x + 1)] = acc[y * (w + 1) + (x + 1)] + row;
        }
    }
    return acc;
}

void scan_variant(const BinaryImage& bin, const std::vector<uint64_t>& acc,
                  const MaskVariant& v, const std::string& cls, double threshold,
                  std::vector<SymbolDetection>& out) {
    if (bin.width() < v.w || bin.height() < v.h) return;
    const double n = double(v.w) * double(v.h);
    const double st = double(v.ink.size());
    const double t_var = st * (n - st);
    if (t_var <= 0.0) return; // flat mask carries no signal

    const size_t stride = bin.width() + 1;
    const double t_den = std::sqrt(t_var);
    for (uint32_t y = 0; y + v.h <= bin.height(); ++y) {
        for (uint32_t x = 0; x + v.w <= bin.width(); ++x) {
            const uint64_t sx = acc[(y + v.h) * stride + (x + v.w)] -
                                acc[size_t(y) * stride + (x + v.w)] -
                                acc[(y + v.h) * stride + x] + acc[size_t(y) * stride + x];
            const double x_var = double(sx) * (n - double(sx));
            if (x_var <= 0.0) continue;
            const double den = std::sqrt(x_var) * t_den;
            // Correlation cannot exceed the value reached at the maximum
            // possible overlap min(sx, st); skip windows that cannot pass.
            const double best = (n * std::min(double(sx), st) - double(sx) * st) / den;
            if (best < threshold) continue;

            uint64_t sxt = 0;
            for (const auto& [tx, ty] : v.ink)
                sxt += bin.at(x + tx, y + ty) ? 1 : 0;
            const double ncc = (n * double(sxt) - double(sx) * st) / den;
            if (ncc < threshold) continue;

            SymbolDetection d;
            d.cls = cls;
            d.bbox = {double(x), double(y), double(x) + v.w, double(y) + v.h};
            d.score = std::clamp(ncc, 0.0, 1.0);
            out.push_back(std::move(d));
        }
    }
}

} // namespace

std::vector<SymbolDetection> detect_templates(const PlanImage& plan,
                                              const std::vector<Template>& templates,
                                              const TemplateMatchParams& params) {
    if (templates.empty()) throw EmptyTemplateSet("detect_templates: no templates given");

    const BinaryImage bin = binarize(plan);
    const auto acc = integral(bin);

    std::vector<SymbolDetection> hits;
    for (const Template& t : templates) {
        std::vector<BinaryImage> rotations;
        rotations.push_back(t.mask);
        if (params.right_angle_rotations)
            for (int i = 0; i < 3; ++i) rotations.push_back(rotate90(rotations.back()));

        for (const BinaryImage& rot : rotations) {
            for (double s : params.scales) {
                const MaskVariant v = to_variant(rescale(rot, s * t.native_scale));
                scan_variant(bin, acc, v, t.cls, params.threshold, hits);
            }
        }
    }
    return suppress_overlaps(std::move(hits), params.nms_iou);
}

namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw SchemaViolation("annotation file " + where + ": " + what);
}

std::vector<SymbolDetection> parse_annotation_json(const std::string& text,
                                                   const std::string& source,
                                                   const ClassRegistry& registry,
                                                   const PlanImage* plan) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        schema_fail(source, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) schema_fail(source, "top level must be an object");
    if (!doc.contains("plan") || !doc["plan"].is_string())
        schema_fail(source, "missing string field \"plan\"");
    if (!doc.contains("symbols") || !doc["symbols"].is_array())
        schema_fail(source, "missing array field \"symbols\"");

    std::vector<SymbolDetection> out;
    std::vector<std::string> seen_ids;
    size_t ordinal = 0;
    for (const json& s : doc["symbols"]) {
        ++ordinal;
        const std::string where = source + ": symbols[" + std::to_string(ordinal - 1) + "]";
        if (!s.is_object()) schema_fail(where, "must be an object");
        if (!s.contains("class") || !s["class"].is_string())
            schema_fail(where, "missing string field \"class\"");

        const auto cls = registry.resolve(s["class"].get<std::string>());
        if (!cls) schema_fail(where, "unknown class \"" + s["class"].get<std::string>() + "\"");

        if (!s.contains("bbox") || !s["bbox"].is_array() || s["bbox"].size() != 4)
            schema_fail(where, "field \"bbox\" must be [x_min, y_min, x_max, y_max]");
        BoundingBox box;
        double* coords[4] = {&box.x_min, &box.y_min, &box.x_max, &box.y_max};
        for (size_t i = 0; i < 4; ++i) {
            if (!s["bbox"][i].is_number()) schema_fail(where, "bbox entries must be numbers");
            *coords[i] = s["bbox"][i].get<double>();
        }
        if (!box.valid() || box.x_min < 0.0 || box.y_min < 0.0)
            schema_fail(where, "bbox is not a valid non-negative box");
        if (plan && (box.x_max > double(plan->width()) || box.y_max > double(plan->height())))
            throw BoxOutOfBounds(where + ": bbox exceeds the plan extent");

        SymbolDetection d;
        d.cls = *cls;
        d.bbox = box;
        if (s.contains("id")) {
            if (!s["id"].is_string() || s["id"].get<std::string>().empty())
                schema_fail(where, "field \"id\" must be a non-empty string");
            d.id = s["id"].get<std::string>();
        } else {
            d.id = *cls + "-" + std::to_string(ordinal);
        }
        if (s.contains("score")) {
            if (!s["score"].is_number()) schema_fail(where, "field \"score\" must be a number");
            d.score = s["score"].get<double>();
            if (d.score < 0.0 || d.score > 1.0) schema_fail(where, "score must be in [0,1]");
        }
        if (std::find(seen_ids.begin(), seen_ids.end(), d.id) != seen_ids.end())
            schema_fail(where, "duplicate symbol id \"" + d.id + "\"");
        seen_ids.push_back(d.id);
        out.push_back(std::move(d));
    }
    return out;
}

} // namespace

std::vector<SymbolDetection> ingest_annotations(const std::string& path, const PlanImage& plan,
                                                const ClassRegistry& registry) {
    return parse_annotation_json(detail::read_text_file(path), path, registry, &plan);
}

std::vector<SymbolDetection> read_annotations(const std::string& path,
                                              const ClassRegistry& registry) {
    return parse_annotation_json(detail::read_text_file(path), path, registry, nullptr);
}

std::string serialize_annotations(const std::string& plan_id,
                                  const std::vector<SymbolDetection>& symbols) {
    ordered_json doc;
    doc["plan"] = plan_id;
    doc["symbols"] = ordered_json::array();
    for (const auto& s : symbols) {
        ordered_json j;
        j["id"] = s.id;
        j["class"] = s.cls;
        j["bbox"] = {s.bbox.x_min, s.bbox.y_min, s.bbox.x_max, s.bbox.y_max};
        j["score"] = s.score;
        doc["symbols"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

void write_annotations(const std::string& path, const std::string& plan_id,
                       const std::vector<SymbolDetection>& symbols) {
    detail::write_text_file(path, serialize_annotations(plan_id, symbols));
}

std::vector<SymbolDetection> suppress_overlaps(std::vector<SymbolDetection> detections,
                                               double iou_threshold) {
    std::sort(detections.begin(), detections.end(), det_less);
    std::vector<SymbolDetection> kept;
    for (auto& d : detections) {
        bool suppressed = false;
        for (const auto& k : kept) {
            if (k.cls != d.cls) continue;
            if (iou(k.bbox, d.bbox) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(std::move(d));
    }
    return kept;
}

std::vector<SymbolDetection> merge_tile_detections(
    const std::vector<std::pair<Tile, std::vector<SymbolDetection>>>& per_tile,
    double iou_dedup) {
    std::vector<SymbolDetection> all;
    for (const auto& [tile, dets] : per_tile) {
        for (const auto& d : dets) {
            SymbolDetection moved = d;
            moved.bbox = to_plan_coords(tile, d.bbox);
            all.push_back(std::move(moved));
        }
    }
    return suppress_overlaps(std::move(all), iou_dedup);
}

std::vector<SymbolDetection> assign_ids(std::vector<SymbolDetection> detections) {
    std::sort(detections.begin(), detections.end(),
              [](const SymbolDetection& a, const SymbolDetection& b) {
                  if (!(a.bbox == b.bbox)) return bbox_less(a.bbox, b.bbox);
                  return a.cls < b.cls;
              });
    for (size_t i = 0; i < detections.size(); ++i)
        detections[i].id = detections[i].cls + "-" + std::to_string(i + 1);
    return detections;
}

} // namespace pidtwin
