#include "pidtwin/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <future>
#include <map>
#include <set>

#include <json.hpp>

#include "pidtwin/errors.hpp"
#include "pidtwin/twin_export.hpp"
#include "textio.hpp"

#ifndef PIDTWIN_VERSION
#define PIDTWIN_VERSION "0.0.0"
#endif

namespace pidtwin {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[24];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct StageClock {
    std::vector<StageTiming>& out;
    const char* stage = nullptr;
    Clock::time_point t0;

    explicit StageClock(std::vector<StageTiming>& timings) : out(timings) {}
    void begin(const char* name) {
        stage = name;
        t0 = Clock::now();
    }
    void end() { out.push_back({stage, ms_since(t0)}); }
};

nlohmann::ordered_json point_json(const Point& p) {
    return nlohmann::ordered_json::array({p.x, p.y});
}

[[noreturn]] void schema_fail(const std::string& what) { throw SchemaViolation(what); }

double number_at(const nlohmann::json& j, const std::string& context) {
    if (!j.is_number()) schema_fail(context + ": expected a number");
    return j.get<double>();
}

Point point_at(const nlohmann::json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 2) schema_fail(context + ": expected [x, y]");
    return {number_at(j[0], context), number_at(j[1], context)};
}

ConnectionMatrix matrix_from_graph(const TopologyGraph& g) {
    std::vector<std::string> ids;
    for (const auto& n : g.nodes) ids.push_back(n.id);
    ConnectionMatrix m(ids);
    for (const auto& [a, b] : g.edges) {
        const auto i = m.index_of(a);
        const auto j = m.index_of(b);
        if (i && j) m.set(*i, *j);
    }
    return m;
}

/// Evaluation inputs: "<stem>.json" files or "<stem>/<nested>" directories.
std::map<std::string, fs::path> collect_eval_files(const std::string& dir,
                                                   const std::string& nested) {
    if (!fs::is_directory(dir)) throw UnreadableFile("not a directory: " + dir);
    std::map<std::string, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const fs::path& p = entry.path();
        if (entry.is_regular_file() && p.extension() == ".json") {
            out[p.stem().string()] = p;
        } else if (entry.is_directory() && fs::is_regular_file(p / nested)) {
            out[p.filename().string()] = p / nested;
        }
    }
    return out;
}

std::string stem_difference(const std::map<std::string, fs::path>& pred,
                            const std::map<std::string, fs::path>& truth) {
    std::string missing, extra;
    for (const auto& [stem, path] : truth)
        if (!pred.count(stem)) missing += (missing.empty() ? "" : ", ") + stem;
    for (const auto& [stem, path] : pred)
        if (!truth.count(stem)) extra += (extra.empty() ? "" : ", ") + stem;
    std::string msg;
    if (!missing.empty()) msg += " missing predictions for: " + missing + ";";
    if (!extra.empty()) msg += " unmatched predictions: " + extra + ";";
    return msg;
}

} // namespace

std::string serialize_manifest(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["tool"] = m.tool;
    j["version"] = m.version;
    j["plan"] = {{"path", m.plan_path}, {"id", m.plan_id}};
    j["config_hash"] = m.config_hash;
    j["extracted_at"] = m.extracted_at;
    j["timings"] = nlohmann::ordered_json::array();
    for (const auto& t : m.timings)
        j["timings"].push_back({{"stage", t.stage}, {"millis", t.millis}});
    j["total_millis"] = m.total_millis;
    j["outputs"] = m.outputs;
    j["counts"] = {{"symbols", m.symbol_count},
                   {"segments", m.segment_count},
                   {"crossings", m.crossing_count},
                   {"connections", m.connection_count}};
    return j.dump(2) + "\n";
}

std::vector<Template> load_templates(const std::string& dir, const ClassRegistry& registry) {
    if (!fs::is_directory(dir)) throw UnreadableFile("not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw EmptyTemplateSet("no .png templates in " + dir);

    std::vector<Template> out;
    for (const fs::path& f : files) {
        const std::string stem = f.stem().string();
        const std::string cls_part = stem.substr(0, stem.find('-'));
        const auto cls = registry.resolve(cls_part);
        if (!cls)
            throw SchemaViolation("template file " + f.filename().string() +
                                  " does not name a known class");
        Template t;
        t.cls = *cls;
        t.mask = binarize(load_plan(f.string()));
        out.push_back(std::move(t));
    }
    return out;
}

ExtractResult run_extract(const ExtractInput& in, const PipelineConfig& cfg) {
    validate(cfg);
    const Clock::time_point t_run = Clock::now();

    RunManifest manifest;
    manifest.version = PIDTWIN_VERSION;
    manifest.plan_path = in.plan_path;
    manifest.config_hash = config_hash_hex(cfg);
    manifest.extracted_at = iso_utc_now();
    StageClock sc(manifest.timings);

    sc.begin("load");
    PlanImage plan = load_plan(in.plan_path);
    sc.end();

    sc.begin("detect");
    const ClassRegistry registry = registry_from(cfg);
    std::vector<SymbolDetection> symbols;
    if (cfg.detect.mode == DetectMode::Template) {
        if (!in.templates_dir)
            throw ConfigError("template detection needs a template directory");
        const std::vector<Template> templates = load_templates(*in.templates_dir, registry);
        std::vector<Tile> tiles = decompose(plan, cfg.tiling.tile_size, cfg.tiling.overlap);
        std::vector<std::vector<SymbolDetection>> per(tiles.size());
        if (in.parallel_tiles && tiles.size() > 1) {
            std::vector<std::future<std::vector<SymbolDetection>>> futures;
            futures.reserve(tiles.size());
            for (const Tile& tile : tiles)
                futures.push_back(std::async(std::launch::async, [&tile, &templates, &cfg] {
                    return detect_templates(tile.image, templates, cfg.detect.params);
                }));
            for (size_t i = 0; i < futures.size(); ++i) per[i] = futures[i].get();
        } else {
            for (size_t i = 0; i < tiles.size(); ++i)
                per[i] = detect_templates(tiles[i].image, templates, cfg.detect.params);
        }
        std::vector<std::pair<Tile, std::vector<SymbolDetection>>> pairs;
        pairs.reserve(tiles.size());
        for (size_t i = 0; i < tiles.size(); ++i)
            pairs.emplace_back(std::move(tiles[i]), std::move(per[i]));
        symbols = assign_ids(merge_tile_detections(pairs, cfg.detect.params.nms_iou));
    } else {
        if (!in.annotations_path)
            throw ConfigError(detect_mode_name(cfg.detect.mode) +
                              " detection needs an annotation file");
        symbols = ingest_annotations(*in.annotations_path, plan, registry);
    }
    sc.end();

    sc.begin("lines");
    const BinaryImage masked = mask_symbols(binarize(plan), symbols, cfg.derive.mask_inflate);
    std::vector<LineSegment> segments = merge_segments(hough_segments(masked, cfg.hough),
                                                       cfg.merge);
    sc.end();

    sc.begin("crossings");
    std::vector<LineCrossing> crossings = find_crossings(segments, cfg.crossings);
    sc.end();

    sc.begin("derive");
    ConnectionMatrix matrix = derive_connections(symbols, segments, crossings,
                                                 cfg.derive.params);
    sc.end();

    sc.begin("graph");
    TopologyGraph graph = matrix_to_graph(matrix, symbols);
    graph.plan_id = plan.source_id();
    graph.config_hash = manifest.config_hash;
    graph.extracted_at = manifest.extracted_at;
    sc.end();

    manifest.plan_id = plan.source_id();
    manifest.symbol_count = symbols.size();
    manifest.segment_count = segments.size();
    manifest.crossing_count = crossings.size();
    manifest.connection_count = graph.edges.size();
    manifest.total_millis = ms_since(t_run);

    return ExtractResult{std::move(plan),     std::move(symbols), std::move(segments),
                         std::move(crossings), std::move(matrix),  std::move(graph),
                         std::move(manifest)};
}

ExtractResult extract_to_dir(const ExtractInput& in, const PipelineConfig& cfg,
                             const std::string& out_dir) {
    ExtractResult res = run_extract(in, cfg);
    const Clock::time_point t_write = Clock::now();
    fs::create_directories(out_dir);

    const TurtleOptions turtle{cfg.exports.base_namespace, cfg.exports.predicate_iri};
    const BudoOptions budo{cfg.exports.building, cfg.exports.system};
    const std::vector<std::pair<std::string, std::string>> files = {
        {"crossings.json", serialize_crossings(res.crossings)},
        {"graph.ttl", export_turtle(res.graph, cfg.exports.mapping, turtle)},
        {"labels.csv",
         export_budo(res.graph, cfg.exports.label_template, cfg.exports.mapping, budo)},
        {"lines.json", serialize_segments(res.segments)},
        {"symbols.json", serialize_annotations(res.plan.source_id(), res.symbols)},
        {"topology.json", export_json(res.graph)},
    };
    for (const auto& [name, content] : files) {
        detail::atomic_write_text_file((fs::path(out_dir) / name).string(), content);
        res.manifest.outputs.push_back(name);
    }
    std::sort(res.manifest.outputs.begin(), res.manifest.outputs.end());

    res.manifest.timings.push_back({"write", ms_since(t_write)});
    res.manifest.total_millis += ms_since(t_write);
    detail::atomic_write_text_file((fs::path(out_dir) / "manifest.json").string(),
                                   serialize_manifest(res.manifest));
    return res;
}

EvalSummary run_eval(const std::string& pred_dir, const std::string& truth_dir, EvalMode mode,
                     const PipelineConfig& cfg) {
    const std::string nested = mode == EvalMode::Symbols ? "symbols.json" : "topology.json";
    const auto pred = collect_eval_files(pred_dir, nested);
    const auto truth = collect_eval_files(truth_dir, nested);
    if (const std::string diff = stem_difference(pred, truth); !diff.empty())
        throw SymbolSetMismatch("prediction and truth sets differ:" + diff);

    EvalSummary summary;
    summary.mode = mode;
    summary.plan_count = pred.size();

    const ClassRegistry registry = registry_from(cfg);
    if (mode == EvalMode::Symbols) {
        std::vector<DetectionMatch> pooled;
        uint64_t truth_total = 0;
        for (const auto& [stem, pred_path] : pred) {
            const auto pred_syms = read_annotations(pred_path.string(), registry);
            const auto truth_syms = read_annotations(truth.at(stem).string(), registry);
            MatchOutcome mo = match_detections(pred_syms, truth_syms, cfg.eval.iou_threshold);
            summary.counts += mo.counts;
            pooled.insert(pooled.end(), mo.ranked.begin(), mo.ranked.end());
            truth_total += truth_syms.size();
        }
        summary.curve = curve_from_matches(std::move(pooled), truth_total);
    } else {
        for (const auto& [stem, pred_path] : pred) {
            try {
                const ConnectionMatrix p = matrix_from_graph(read_topology_json(pred_path.string()));
                const ConnectionMatrix t =
                    matrix_from_graph(read_topology_json(truth.at(stem).string()));
                summary.counts += score_connections(p, t);
            } catch (const SymbolSetMismatch& e) {
                throw SymbolSetMismatch(stem + ": " + e.what());
            }
        }
    }
    summary.report = metrics(summary.counts);
    return summary;
}

std::string serialize_eval_report(const EvalSummary& s) {
    nlohmann::ordered_json j;
    j["mode"] = s.mode == EvalMode::Symbols ? "symbols" : "connections";
    j["plans"] = s.plan_count;
    j["counts"] = {{"tp", s.counts.tp}, {"fp", s.counts.fp}, {"fn", s.counts.fn},
                   {"tn", s.counts.tn}};
    auto metric = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    j["metrics"] = {{"recall", metric(s.report.recall)},
                    {"precision", metric(s.report.precision)},
                    {"f1", metric(s.report.f1)},
                    {"accuracy", metric(s.report.accuracy)},
                    {"specificity", metric(s.report.specificity)},
                    {"npv", metric(s.report.npv)}};
    if (s.curve) j["ap"] = s.curve->ap;
    return j.dump(2) + "\n";
}

std::string serialize_pr_csv(const PRCurve& c) {
    std::string out = "threshold,recall,precision\n";
    for (const PRPoint& p : c.points)
        out += detail::fmt_double(p.threshold) + "," + detail::fmt_double(p.recall) + "," +
               detail::fmt_double(p.precision) + "\n";
    return out;
}

std::string serialize_segments(const std::vector<LineSegment>& segs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : segs) {
        nlohmann::ordered_json j;
        j["id"] = s.id;
        j["p1"] = point_json(s.p1);
        j["p2"] = point_json(s.p2);
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<LineSegment> parse_segments(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) schema_fail("segment list: expected a JSON array");
    std::vector<LineSegment> out;
    for (size_t i = 0; i < j.size(); ++i) {
        const std::string context = "lines[" + std::to_string(i) + "]";
        const auto& e = j[i];
        if (!e.is_object() || !e.contains("id") || !e["id"].is_string() || !e.contains("p1") ||
            !e.contains("p2"))
            schema_fail(context + ": expected {id, p1, p2}");
        const Point a = point_at(e["p1"], context + ".p1");
        const Point b = point_at(e["p2"], context + ".p2");
        if (a == b) schema_fail(context + ": degenerate segment");
        out.push_back(make_segment(e["id"].get<std::string>(), a, b));
    }
    return out;
}

std::string serialize_crossings(const std::vector<LineCrossing>& crossings) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : crossings) {
        nlohmann::ordered_json j;
        j["id"] = c.id;
        j["at"] = point_json(c.at);
        j["incident"] = c.incident;
        j["degree"] = c.degree;
        j["connective"] = c.connective;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<LineCrossing> parse_crossings(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) schema_fail("crossing list: expected a JSON array");
    std::vector<LineCrossing> out;
    for (size_t i = 0; i < j.size(); ++i) {
        const std::string context = "crossings[" + std::to_string(i) + "]";
        const auto& e = j[i];
        if (!e.is_object() || !e.contains("id") || !e["id"].is_string() || !e.contains("at") ||
            !e.contains("incident") || !e["incident"].is_array() || !e.contains("degree") ||
            !e["degree"].is_number_integer() || !e.contains("connective") ||
            !e["connective"].is_boolean())
            schema_fail(context + ": expected {id, at, incident, degree, connective}");
        LineCrossing c;
        c.id = e["id"].get<std::string>();
        c.at = point_at(e["at"], context + ".at");
        for (const auto& inc : e["incident"]) {
            if (!inc.is_string()) schema_fail(context + ".incident: expected segment ids");
            c.incident.push_back(inc.get<std::string>());
        }
        c.degree = e["degree"].get<int>();
        c.connective = e["connective"].get<bool>();
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace pidtwin
