#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pidtwin/config.hpp"
#include "pidtwin/crossings.hpp"
#include "pidtwin/eval.hpp"
#include "pidtwin/lines.hpp"
#include "pidtwin/plan.hpp"
#include "pidtwin/symbols.hpp"
#include "pidtwin/topology.hpp"

namespace pidtwin {

struct StageTiming {
    std::string stage;
    double millis = 0.0;
};

/// Run metadata. The manifest is the one output that is not byte-deterministic
/// (it carries wall-clock timings and a timestamp); it is written atomically
/// at run end.
struct RunManifest {
    std::string tool = "pidtwin";
    std::string version;
    std::string plan_path;
    std::string plan_id;
    std::string config_hash; // 16 hex digits
    std::string extracted_at; // ISO 8601 UTC
    std::vector<StageTiming> timings; // pipeline order
    double total_millis = 0.0;
    std::vector<std::string> outputs; // file names written, sorted
    uint64_t symbol_count = 0;
    uint64_t segment_count = 0;
    uint64_t crossing_count = 0;
    uint64_t connection_count = 0;
};

std::string serialize_manifest(const RunManifest& m);

struct ExtractInput {
    std::string plan_path;
    std::optional<std::string> annotations_path; // annotation / external detector file
    std::optional<std::string> templates_dir;    // template-mode glyph directory
    bool parallel_tiles = true;
};

struct ExtractResult {
    PlanImage plan;
    std::vector<SymbolDetection> symbols;
    std::vector<LineSegment> segments; // merged
    std::vector<LineCrossing> crossings;
    ConnectionMatrix matrix;
    TopologyGraph graph;
    RunManifest manifest;
};

/// Loads binary glyph masks from a directory of PNG files named
/// "<Class>.png" or "<Class>-<variant>.png" (class names resolved through the
/// registry). Throws EmptyTemplateSet when none are found.
std::vector<Template> load_templates(const std::string& dir, const ClassRegistry& registry);

/// The full pipeline in memory: load, tile, detect symbols, extract and merge
/// lines, find crossings, derive connections, assemble the graph. Touches the
/// filesystem only to read inputs. Stage timings cover every stage.
ExtractResult run_extract(const ExtractInput& in, const PipelineConfig& cfg);

/// run_extract plus serialization: writes topology.json, graph.ttl,
/// labels.csv, symbols.json, lines.json, crossings.json and manifest.json
/// into out_dir (created if needed). Every file except manifest.json has
/// byte-deterministic content.
ExtractResult extract_to_dir(const ExtractInput& in, const PipelineConfig& cfg,
                             const std::string& out_dir);

enum class EvalMode { Symbols, Connections };

struct EvalSummary {
    EvalMode mode = EvalMode::Symbols;
    size_t plan_count = 0;
    ConfusionCounts counts; // aggregated over plans
    MetricReport report;
    std::optional<PRCurve> curve; // symbols mode only, pooled over plans
};

/// Pairs prediction and truth by file stem and aggregates counts over all
/// pairs. Symbols mode reads Annotation JSON ("<stem>.json" or
/// "<stem>/symbols.json"); connections mode reads Topology JSON
/// ("<stem>.json" or "<stem>/topology.json"). Differing stem sets throw
/// SymbolSetMismatch naming the offending stems.
EvalSummary run_eval(const std::string& pred_dir, const std::string& truth_dir, EvalMode mode,
                     const PipelineConfig& cfg);

std::string serialize_eval_report(const EvalSummary& s);

/// CSV "threshold,recall,precision", one row per curve point.
std::string serialize_pr_csv(const PRCurve& c);

/// Debug overlay: the plan raster embedded as PNG, merged segments, crossings
/// colored by connectivity, symbol boxes and derived connection edges.
/// Byte-deterministic.
std::string render_overlay_svg(const PlanImage& plan,
                               const std::vector<SymbolDetection>& symbols,
                               const std::vector<LineSegment>& segments,
                               const std::vector<LineCrossing>& crossings,
                               const TopologyGraph& graph);

/// Reads the extract outputs back from a directory and renders the overlay.
std::string overlay_from_dir(const std::string& plan_path, const std::string& extract_dir);

/// Serialized segment list: [{"id", "p1":[x,y], "p2":[x,y]}]. Deterministic.
std::string serialize_segments(const std::vector<LineSegment>& segs);
std::vector<LineSegment> parse_segments(const std::string& text);

/// Serialized crossing list: [{"id", "at":[x,y], "incident", "degree",
/// "connective"}]. Deterministic.
std::string serialize_crossings(const std::vector<LineCrossing>& crossings);
std::vector<LineCrossing> parse_crossings(const std::string& text);

} // namespace pidtwin
