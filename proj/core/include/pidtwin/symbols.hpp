#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pidtwin/geometry.hpp"
#include "pidtwin/plan.hpp"
#include "pidtwin/raster.hpp"

namespace pidtwin {

/// Registry of known equipment classes. Canonical names are unique; lookups are
/// case-insensitive.
class ClassRegistry {
public:
    /// Pump, Valve, HeatExchanger, Flap.
    static ClassRegistry defaults();

    void add(std::string name);
    const std::vector<std::string>& names() const { return names_; }

    /// Canonical name for a case-insensitive match, or nullopt.
    std::optional<std::string> resolve(std::string_view name) const;

private:
    std::vector<std::string> names_;
};

/// One detected (or annotated) equipment symbol in whole-plan coordinates.
struct SymbolDetection {
    std::string id;     // e.g. "Pump-4"
    std::string cls;    // canonical class name
    BoundingBox bbox;
    double score = 1.0; // in [0,1]

    friend bool operator==(const SymbolDetection& a, const SymbolDetection& b) {
        return a.id == b.id && a.cls == b.cls && a.bbox == b.bbox && a.score == b.score;
    }
};

/// Binary glyph mask used by the template-matching baseline.
struct Template {
    std::string cls;
    BinaryImage mask;          // 1 = ink
    double native_scale = 1.0; // pixels of plan per pixel of mask at scale 1
};

struct TemplateMatchParams {
    double threshold = 0.6; // minimum normalized cross-correlation, in (0,1)
    double nms_iou = 0.5;
    std::vector<double> scales = {0.75, 1.0, 1.25};
    bool right_angle_rotations = true; // try 0/90/180/270 degree variants
};

/// Scans the plan with zero-mean normalized cross-correlation against every
/// template over the configured scale pyramid and right-angle rotations, then
/// reduces overlapping same-class hits with non-maximum suppression.
/// Detections are deterministic: ties break on lexicographic bbox order.
/// Throws EmptyTemplateSet.
std::vector<SymbolDetection> detect_templates(const PlanImage& plan,
                                              const std::vector<Template>& templates,
                                              const TemplateMatchParams& params = {});

/// Loads the Annotation JSON format:
///   { "plan": string, "symbols": [ { "id"?: string, "class": string,
///     "bbox": [x_min, y_min, x_max, y_max], "score"?: number } ] }
/// Missing ids become "<Class>-<ordinal>" (ordinal = 1-based position in the file),
/// missing scores become 1.0. Boxes must lie inside the plan extent.
/// Throws SchemaViolation, BoxOutOfBounds, UnreadableFile.
std::vector<SymbolDetection> ingest_annotations(const std::string& path, const PlanImage& plan,
                                                const ClassRegistry& registry = ClassRegistry::defaults());

/// Same format and rules, but without the plan-extent bounds check (evaluation
/// inputs have no raster at hand).
std::vector<SymbolDetection> read_annotations(const std::string& path,
                                              const ClassRegistry& registry = ClassRegistry::defaults());

/// Serializes detections to the Annotation JSON format (deterministic bytes).
std::string serialize_annotations(const std::string& plan_id,
                                  const std::vector<SymbolDetection>& symbols);
void write_annotations(const std::string& path, const std::string& plan_id,
                       const std::vector<SymbolDetection>& symbols);

/// Per-class greedy non-maximum suppression: same-class boxes with
/// IoU >= iou_threshold collapse onto the highest-score one.
std::vector<SymbolDetection> suppress_overlaps(std::vector<SymbolDetection> detections,
                                               double iou_threshold);

/// Translates per-tile detections into plan coordinates and deduplicates
/// cross-seam duplicates per class. Ids are reassigned plan-wide afterwards.
std::vector<SymbolDetection> merge_tile_detections(
    const std::vector<std::pair<Tile, std::vector<SymbolDetection>>>& per_tile,
    double iou_dedup);

/// Sorts detections into reading order (y, then x, then class) and assigns
/// ids "<Class>-<ordinal>" with a plan-wide ordinal.
std::vector<SymbolDetection> assign_ids(std::vector<SymbolDetection> detections);

} // namespace pidtwin
