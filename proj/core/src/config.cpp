#include "pidtwin/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <vector>

#include "pidtwin/errors.hpp"
#include "textio.hpp"

namespace pidtwin {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& context, const std::string& key,
                            const std::string& value) {
    throw ConfigError(context + ": invalid value '" + value + "' for " + key);
}

double parse_double(const std::string& context, const std::string& key,
                    const std::string& value) {
    const std::string v = trim(value);
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) bad_value(context, key, value);
    return out;
}

int64_t parse_int(const std::string& context, const std::string& key,
                  const std::string& value) {
    const std::string v = trim(value);
    int64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) bad_value(context, key, value);
    return out;
}

uint32_t parse_u32(const std::string& context, const std::string& key,
                   const std::string& value) {
    const int64_t v = parse_int(context, key, value);
    if (v < 0 || v > int64_t(UINT32_MAX)) bad_value(context, key, value);
    return uint32_t(v);
}

bool parse_bool(const std::string& context, const std::string& key,
                const std::string& value) {
    const std::string v = detail::to_lower(trim(value));
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    bad_value(context, key, value);
}

std::vector<double> parse_double_list(const std::string& context, const std::string& key,
                                      const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) out.push_back(parse_double(context, key, item));
    if (out.empty()) bad_value(context, key, value);
    return out;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += detail::fmt_double(v[i]);
    }
    return out;
}

struct KeyDef {
    const char* key;
    std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<KeyDef>& key_table() {
    using C = PipelineConfig;
    static const std::vector<KeyDef> table = {
        {"crossings.angle_tol_deg",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.crossings.angle_tol_deg = parse_double(ctx, "crossings.angle_tol_deg", v);
         },
         [](const C& c) { return detail::fmt_double(c.crossings.angle_tol_deg); }},
        {"crossings.cluster_radius",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.crossings.cluster_radius = parse_double(ctx, "crossings.cluster_radius", v);
         },
         [](const C& c) { return detail::fmt_double(c.crossings.cluster_radius); }},
        {"crossings.eps",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.crossings.eps = parse_double(ctx, "crossings.eps", v);
         },
         [](const C& c) { return detail::fmt_double(c.crossings.eps); }},
        {"crossings.four_way_connective",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.crossings.four_way_connective = parse_bool(ctx, "crossings.four_way_connective", v);
         },
         [](const C& c) { return c.crossings.four_way_connective ? "true" : "false"; }},
        {"derive.attach_inflate",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.derive.params.attach_inflate = parse_double(ctx, "derive.attach_inflate", v);
         },
         [](const C& c) { return detail::fmt_double(c.derive.params.attach_inflate); }},
        {"derive.mask_inflate",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.derive.mask_inflate = parse_double(ctx, "derive.mask_inflate", v);
         },
         [](const C& c) { return detail::fmt_double(c.derive.mask_inflate); }},
        {"detect.mode",
         [](C& c, const std::string& v, const std::string& ctx) {
             try {
                 c.detect.mode = parse_detect_mode(trim(v));
             } catch (const ConfigError&) {
                 bad_value(ctx, "detect.mode", v);
             }
         },
         [](const C& c) { return detect_mode_name(c.detect.mode); }},
        {"detect.nms_iou",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.detect.params.nms_iou = parse_double(ctx, "detect.nms_iou", v);
         },
         [](const C& c) { return detail::fmt_double(c.detect.params.nms_iou); }},
        {"detect.rotations",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.detect.params.right_angle_rotations = parse_bool(ctx, "detect.rotations", v);
         },
         [](const C& c) { return c.detect.params.right_angle_rotations ? "true" : "false"; }},
        {"detect.scales",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.detect.params.scales = parse_double_list(ctx, "detect.scales", v);
         },
         [](const C& c) { return fmt_list(c.detect.params.scales); }},
        {"detect.threshold",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.detect.params.threshold = parse_double(ctx, "detect.threshold", v);
         },
         [](const C& c) { return detail::fmt_double(c.detect.params.threshold); }},
        {"eval.iou_threshold",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.eval.iou_threshold = parse_double(ctx, "eval.iou_threshold", v);
         },
         [](const C& c) { return detail::fmt_double(c.eval.iou_threshold); }},
        {"export.base_namespace",
         [](C& c, const std::string& v, const std::string&) {
             c.exports.base_namespace = trim(v);
         },
         [](const C& c) { return c.exports.base_namespace; }},
        {"export.building",
         [](C& c, const std::string& v, const std::string&) { c.exports.building = trim(v); },
         [](const C& c) { return c.exports.building; }},
        {"export.label_template",
         [](C& c, const std::string& v, const std::string&) {
             c.exports.label_template = trim(v);
         },
         [](const C& c) { return c.exports.label_template; }},
        {"export.predicate_iri",
         [](C& c, const std::string& v, const std::string&) {
             c.exports.predicate_iri = trim(v);
         },
         [](const C& c) { return c.exports.predicate_iri; }},
        {"export.system",
         [](C& c, const std::string& v, const std::string&) { c.exports.system = trim(v); },
         [](const C& c) { return c.exports.system; }},
        {"hough.max_gap",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.hough.max_gap = parse_double(ctx, "hough.max_gap", v);
         },
         [](const C& c) { return detail::fmt_double(c.hough.max_gap); }},
        {"hough.min_len",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.hough.min_len = parse_double(ctx, "hough.min_len", v);
         },
         [](const C& c) { return detail::fmt_double(c.hough.min_len); }},
        {"hough.rho_res",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.hough.rho_res = parse_double(ctx, "hough.rho_res", v);
         },
         [](const C& c) { return detail::fmt_double(c.hough.rho_res); }},
        {"hough.theta_res_deg",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.hough.theta_res_deg = parse_double(ctx, "hough.theta_res_deg", v);
         },
         [](const C& c) { return detail::fmt_double(c.hough.theta_res_deg); }},
        {"hough.votes",
         [](C& c, const std::string& v, const std::string& ctx) {
             const int64_t n = parse_int(ctx, "hough.votes", v);
             if (n < 1 || n > INT32_MAX) bad_value(ctx, "hough.votes", v);
             c.hough.votes = int(n);
         },
         [](const C& c) { return std::to_string(c.hough.votes); }},
        {"merge.angle_tol_deg",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.merge.angle_tol_deg = parse_double(ctx, "merge.angle_tol_deg", v);
         },
         [](const C& c) { return detail::fmt_double(c.merge.angle_tol_deg); }},
        {"merge.gap_tol",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.merge.gap_tol = parse_double(ctx, "merge.gap_tol", v);
         },
         [](const C& c) { return detail::fmt_double(c.merge.gap_tol); }},
        {"merge.offset_tol",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.merge.offset_tol = parse_double(ctx, "merge.offset_tol", v);
         },
         [](const C& c) { return detail::fmt_double(c.merge.offset_tol); }},
        {"tiling.overlap",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.tiling.overlap = parse_u32(ctx, "tiling.overlap", v);
         },
         [](const C& c) { return std::to_string(c.tiling.overlap); }},
        {"tiling.tile_size",
         [](C& c, const std::string& v, const std::string& ctx) {
             c.tiling.tile_size = parse_u32(ctx, "tiling.tile_size", v);
         },
         [](const C& c) { return std::to_string(c.tiling.tile_size); }},
    };
    return table;
}

const KeyDef* find_key(const std::string& key) {
    for (const auto& def : key_table())
        if (key == def.key) return &def;
    return nullptr;
}

/// export.map.<Class> = <ontology class>,<label code>
void set_mapping(PipelineConfig& cfg, const std::string& key, const std::string& value,
                 const std::string& context) {
    const std::string cls = key.substr(std::string("export.map.").size());
    if (cls.empty() || cls.find_first_of(" \t") != std::string::npos)
        throw ConfigError(context + ": bad class name in key '" + key + "'");
    const size_t comma = value.find(',');
    if (comma == std::string::npos) bad_value(context, key, value);
    const std::string iri = trim(value.substr(0, comma));
    const std::string code = trim(value.substr(comma + 1));
    if (iri.empty() || code.empty()) bad_value(context, key, value);
    cfg.exports.mapping.ontology_class[cls] = iri;
    cfg.exports.mapping.label_code[cls] = code;
}

} // namespace

DetectMode parse_detect_mode(const std::string& name) {
    const std::string v = detail::to_lower(name);
    if (v == "template") return DetectMode::Template;
    if (v == "annotations") return DetectMode::Annotations;
    if (v == "external") return DetectMode::External;
    throw ConfigError("unknown detector mode '" + name + "'");
}

std::string detect_mode_name(DetectMode mode) {
    switch (mode) {
        case DetectMode::Template: return "template";
        case DetectMode::Annotations: return "annotations";
        case DetectMode::External: return "external";
    }
    throw ConfigError("unknown detector mode value");
}

PipelineConfig parse_config_text(const std::string& text, const std::string& source_name) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::string context = source_name + ":" + std::to_string(line_no);
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(context + ": expected 'key = value', got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw ConfigError(context + ": empty key");
        if (key.rfind("export.map.", 0) == 0) {
            set_mapping(cfg, key, value, context);
        } else if (const KeyDef* def = find_key(key)) {
            def->set(cfg, value, context);
        } else {
            throw ConfigError(context + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    PipelineConfig cfg = parse_config_text(detail::read_text_file(path), path);
    apply_env_overrides(cfg);
    validate(cfg);
    return cfg;
}

void apply_env_overrides(PipelineConfig& cfg) {
    for (const auto& def : key_table()) {
        std::string name = "PIDTWIN_";
        for (const char ch : std::string(def.key))
            name += ch == '.' ? '_' : char(std::toupper((unsigned char)ch));
        if (const char* value = std::getenv(name.c_str()))
            def.set(cfg, value, "environment variable " + name);
    }
}

void validate(const PipelineConfig& cfg) {
    auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
    if (cfg.tiling.tile_size < 1) fail("tiling.tile_size must be positive");
    if (uint64_t(cfg.tiling.overlap) * 2 >= cfg.tiling.tile_size)
        fail("tiling.overlap must be less than half of tiling.tile_size");
    if (!(cfg.detect.params.threshold > 0.0 && cfg.detect.params.threshold <= 1.0))
        fail("detect.threshold must be in (0, 1]");
    if (!(cfg.detect.params.nms_iou >= 0.0 && cfg.detect.params.nms_iou <= 1.0))
        fail("detect.nms_iou must be in [0, 1]");
    if (cfg.detect.params.scales.empty()) fail("detect.scales must not be empty");
    for (const double s : cfg.detect.params.scales)
        if (!(s > 0.0)) fail("detect.scales entries must be positive");
    if (!(cfg.hough.rho_res > 0.0)) fail("hough.rho_res must be positive");
    if (!(cfg.hough.theta_res_deg > 0.0 && cfg.hough.theta_res_deg <= 90.0))
        fail("hough.theta_res_deg must be in (0, 90]");
    if (cfg.hough.votes < 1) fail("hough.votes must be at least 1");
    if (!(cfg.hough.min_len > 0.0)) fail("hough.min_len must be positive");
    if (cfg.hough.max_gap < 0.0) fail("hough.max_gap must not be negative");
    if (!(cfg.merge.angle_tol_deg >= 0.0 && cfg.merge.angle_tol_deg < 90.0))
        fail("merge.angle_tol_deg must be in [0, 90)");
    if (cfg.merge.offset_tol < 0.0) fail("merge.offset_tol must not be negative");
    if (cfg.merge.gap_tol < 0.0) fail("merge.gap_tol must not be negative");
    if (cfg.crossings.eps < 0.0) fail("crossings.eps must not be negative");
    if (cfg.crossings.cluster_radius < 0.0) fail("crossings.cluster_radius must not be negative");
    if (!(cfg.crossings.angle_tol_deg >= 0.0 && cfg.crossings.angle_tol_deg < 45.0))
        fail("crossings.angle_tol_deg must be in [0, 45)");
    if (cfg.derive.mask_inflate < 0.0) fail("derive.mask_inflate must not be negative");
    if (cfg.derive.params.attach_inflate < 0.0)
        fail("derive.attach_inflate must not be negative");
    if (cfg.exports.building.empty()) fail("export.building must not be empty");
    if (cfg.exports.system.empty()) fail("export.system must not be empty");
    if (cfg.exports.label_template.empty()) fail("export.label_template must not be empty");
    if (cfg.exports.base_namespace.empty()) fail("export.base_namespace must not be empty");
    if (cfg.exports.predicate_iri.empty()) fail("export.predicate_iri must not be empty");
    if (!(cfg.eval.iou_threshold > 0.0 && cfg.eval.iou_threshold <= 1.0))
        fail("eval.iou_threshold must be in (0, 1]");
    for (const auto& [cls, iri] : cfg.exports.mapping.ontology_class) {
        if (iri.empty()) fail("export mapping for " + cls + " has an empty ontology class");
        if (!cfg.exports.mapping.label_code.count(cls))
            fail("export mapping for " + cls + " lacks a label code");
    }
    for (const auto& [cls, code] : cfg.exports.mapping.label_code) {
        if (code.empty()) fail("export mapping for " + cls + " has an empty label code");
        if (!cfg.exports.mapping.ontology_class.count(cls))
            fail("export mapping for " + cls + " lacks an ontology class");
    }
}

std::string canonical_config(const PipelineConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& def : key_table()) rows.emplace_back(def.key, def.get(cfg));
    for (const auto& [cls, iri] : cfg.exports.mapping.ontology_class) {
        const auto code = cfg.exports.mapping.label_code.find(cls);
        rows.emplace_back("export.map." + cls,
                          iri + "," + (code == cfg.exports.mapping.label_code.end()
                                           ? std::string()
                                           : code->second));
    }
    std::sort(rows.begin(), rows.end());
    std::string out;
    for (const auto& [k, v] : rows) out += k + " = " + v + "\n";
    return out;
}

uint64_t config_hash(const PipelineConfig& cfg) {
    const std::string text = canonical_config(cfg);
    uint64_t h = 1469598103934665603ull;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash_hex(const PipelineConfig& cfg) {
    static const char* digits = "0123456789abcdef";
    uint64_t h = config_hash(cfg);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[size_t(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

ClassRegistry registry_from(const PipelineConfig& cfg) {
    ClassRegistry reg = ClassRegistry::defaults();
    for (const auto& [cls, iri] : cfg.exports.mapping.ontology_class) {
        (void)iri;
        if (!reg.resolve(cls)) reg.add(cls);
    }
    return reg;
}

} // namespace pidtwin
