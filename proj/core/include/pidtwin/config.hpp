#pragma once

#include <cstdint>
#include <string>

#include "pidtwin/crossings.hpp"
#include "pidtwin/lines.hpp"
#include "pidtwin/symbols.hpp"
#include "pidtwin/topology.hpp"
#include "pidtwin/twin_export.hpp"

namespace pidtwin {

struct TilingConfig {
    uint32_t tile_size = 800;
    uint32_t overlap = 100;
};

/// Template: built-in matcher. Annotations: ground-truth boxes from a file.
/// External: same file format, produced by an out-of-tree detector.
enum class DetectMode { Template, Annotations, External };

struct DetectConfig {
    DetectMode mode = DetectMode::Template;
    TemplateMatchParams params;
};

struct DeriveConfig {
    double mask_inflate = 2.0; // symbol mask growth before line extraction
    DeriveParams params;
};

struct ExportConfig {
    std::string building = "B1";
    std::string system = "H";
    std::string label_template = "{building}_{system}_{class_code}_{ordinal}";
    std::string base_namespace = "urn:pidtwin:";
    std::string predicate_iri = "urn:pidtwin:connectedTo";
    ClassMapping mapping = ClassMapping::defaults();
};

struct EvalConfig {
    double iou_threshold = 0.5;
};

struct PipelineConfig {
    TilingConfig tiling;
    DetectConfig detect;
    HoughParams hough;
    MergeParams merge;
    CrossingParams crossings;
    DeriveConfig derive;
    ExportConfig exports;
    EvalConfig eval;
};

/// "template", "annotations" or "external"; throws ConfigError otherwise.
DetectMode parse_detect_mode(const std::string& name);
std::string detect_mode_name(DetectMode mode);

/// Parses `key = value` lines; lines whose first non-space character is `#`
/// are comments, blank lines are skipped, later keys win over earlier ones.
/// Unknown keys and malformed values throw ConfigError naming the offender.
PipelineConfig parse_config_text(const std::string& text, const std::string& source_name);

/// parse_config_text over the file contents, then apply_env_overrides,
/// then validate. Missing file throws UnreadableFile.
PipelineConfig load_config(const std::string& path);

/// Environment variables named PIDTWIN_<KEY> override config values, where
/// <KEY> is the config key uppercased with '.' replaced by '_'
/// (e.g. PIDTWIN_TILING_TILE_SIZE). Invalid values throw ConfigError.
void apply_env_overrides(PipelineConfig& cfg);

/// Range checks across all fields; throws ConfigError on the first violation.
void validate(const PipelineConfig& cfg);

/// Full key=value listing, one per line, keys sorted, values rendered in
/// a fixed locale-independent form. Stable across platforms.
std::string canonical_config(const PipelineConfig& cfg);

/// FNV-1a 64-bit hash of canonical_config(cfg).
uint64_t config_hash(const PipelineConfig& cfg);

/// Hex rendering (16 lowercase digits) of config_hash.
std::string config_hash_hex(const PipelineConfig& cfg);

/// Default classes plus every class added to the export mapping.
ClassRegistry registry_from(const PipelineConfig& cfg);

} // namespace pidtwin
