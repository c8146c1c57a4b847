#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pidtwin/errors.hpp"
#include "pidtwin/pipeline.hpp"
#include "pidtwin/synthetic.hpp"
#include "support.hpp"

using namespace pidtwin;
using testsupport::TempDir;

namespace {

namespace fs = std::filesystem;

size_t count_of(const std::string& text, const std::string& needle) {
    size_t n = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

LayoutSpec two_symbol_layout() {
    LayoutSpec spec;
    spec.plan_id = "mini";
    spec.cols = 4;
    spec.rows = 3;
    spec.symbols = {{"Pump", {0, 1}}, {"Valve", {3, 1}}};
    spec.conduits = {{{0, 1}, {3, 1}}};
    return spec;
}

/// Bus with a tee branch and a non-connecting crossover bar.
LayoutSpec junction_layout() {
    LayoutSpec spec;
    spec.plan_id = "junctions";
    spec.cols = 4;
    spec.rows = 3;
    spec.symbols = {{"Pump", {0, 1}}, {"Valve", {3, 1}}, {"Flap", {1, 0}}};
    spec.conduits = {{{0, 1}, {3, 1}}, {{1, 0}, {1, 1}}, {{2, 0}, {2, 2}}};
    return spec;
}

PipelineConfig annotation_config() {
    PipelineConfig cfg;
    cfg.detect.mode = DetectMode::Annotations;
    return cfg;
}

/// Renders the layout, saves the plan PNG and its annotation file.
ExtractInput stage_plan(const TempDir& dir, const LayoutSpec& spec, const std::string& name,
                        SyntheticPlan* out = nullptr) {
    auto syn = generate_synthetic_plan(spec, 1);
    ExtractInput in;
    in.plan_path = dir.file(name + ".png");
    in.annotations_path = dir.file(name + ".ann.json");
    save_png(syn.image, in.plan_path);
    testsupport::write_file(*in.annotations_path,
                            serialize_annotations(spec.plan_id, syn.symbols));
    if (out) *out = std::move(syn);
    return in;
}

void write_template_dir(const std::string& dir, uint32_t cell_px) {
    fs::create_directories(dir);
    const uint32_t box = 2 * std::max(10u, cell_px / 5) + 1;
    for (const Template& t : reference_templates(box)) {
        PlanImage img = PlanImage::filled(t.mask.width(), t.mask.height(), 255, t.cls);
        for (uint32_t y = 0; y < t.mask.height(); ++y)
            for (uint32_t x = 0; x < t.mask.width(); ++x)
                if (t.mask.at(x, y)) img.set(x, y, 0);
        save_png(img, (fs::path(dir) / (t.cls + ".png")).string());
    }
}

} // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("segment lists serialize and parse back") {
    const std::vector<LineSegment> segs{
        make_segment("Line-1", {10, 20}, {110.5, 20}),
        make_segment("Line-2", {30.25, 5.75}, {30.25, 95}),
        make_segment("Line-3", {0, 0}, {64, 64}),
    };
    const auto text = serialize_segments(segs);
    CHECK(text == serialize_segments(segs)); // deterministic bytes
    const auto back = parse_segments(text);
    REQUIRE(back.size() == segs.size());
    for (size_t i = 0; i < segs.size(); ++i) {
        CHECK(back[i].id == segs[i].id);
        CHECK(back[i].p1 == segs[i].p1);
        CHECK(back[i].p2 == segs[i].p2);
        CHECK(back[i].angle_deg == segs[i].angle_deg);
        CHECK(back[i].length == segs[i].length);
    }
    CHECK(serialize_segments({}) == "[]\n");
    CHECK(parse_segments("[]").empty());

    CHECK_THROWS_AS(parse_segments("not json"), SchemaViolation);
    CHECK_THROWS_AS(parse_segments("{}"), SchemaViolation);
    CHECK_THROWS_AS(parse_segments(R"([{"id": "x", "p1": [0,0], "p2": [0,0]}])"),
                    SchemaViolation);
    CHECK_THROWS_AS(parse_segments(R"([{"id": "x", "p1": [0,0,0], "p2": [1,1]}])"),
                    SchemaViolation);
    CHECK_THROWS_AS(parse_segments(R"([{"p1": [0,0], "p2": [1,1]}])"), SchemaViolation);
}

TEST_CASE("crossing lists serialize and parse back") {
    const std::vector<LineCrossing> crossings{
        {"LineCrossing-1", {40.5, 60}, {"Line-1", "Line-2"}, 3, true},
        {"LineCrossing-2", {80, 60}, {"Line-1", "Line-3"}, 4, false},
    };
    const auto text = serialize_crossings(crossings);
    const auto back = parse_crossings(text);
    REQUIRE(back.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(back[i].id == crossings[i].id);
        CHECK(back[i].at == crossings[i].at);
        CHECK(back[i].incident == crossings[i].incident);
        CHECK(back[i].degree == crossings[i].degree);
        CHECK(back[i].connective == crossings[i].connective);
    }
    CHECK(serialize_crossings({}) == "[]\n");

    CHECK_THROWS_AS(parse_crossings("{}"), SchemaViolation);
    CHECK_THROWS_AS(
        parse_crossings(R"([{"id": "c", "at": [0,0], "incident": [], "degree": 2}])"),
        SchemaViolation);
    CHECK_THROWS_AS(parse_crossings(
                        R"([{"id": "c", "at": [0,0], "incident": [1], "degree": 2,
                             "connective": true}])"),
                    SchemaViolation);
}

TEST_CASE("run_extract recovers the drawn topology") {
    TempDir dir("extract");
    SyntheticPlan syn;
    const auto in = stage_plan(dir, two_symbol_layout(), "mini", &syn);
    const auto cfg = annotation_config();

    const auto res = run_extract(in, cfg);
    CHECK(res.plan.source_id() == "mini");
    CHECK(res.graph.plan_id == "mini");
    REQUIRE(res.symbols.size() == 2);
    CHECK(res.symbols[0].id == "Pump-1");
    CHECK(res.symbols[1].id == "Valve-2");
    CHECK(res.graph.edges == syn.truth.edges());
    CHECK(res.matrix.edges() == res.graph.edges);
    CHECK_FALSE(res.segments.empty());

    const auto& m = res.manifest;
    CHECK(m.tool == "pidtwin");
    CHECK(m.plan_path == in.plan_path);
    CHECK(m.plan_id == "mini");
    CHECK(m.config_hash == config_hash_hex(cfg));
    CHECK(m.extracted_at.size() == 20); // YYYY-MM-DDTHH:MM:SSZ
    CHECK(m.extracted_at.back() == 'Z');
    CHECK(m.symbol_count == 2);
    CHECK(m.segment_count == res.segments.size());
    CHECK(m.crossing_count == res.crossings.size());
    CHECK(m.connection_count == res.graph.edges.size());

    const std::vector<std::string> stages{"load", "detect", "lines",
                                          "crossings", "derive", "graph"};
    REQUIRE(m.timings.size() == stages.size());
    double sum = 0.0;
    for (size_t i = 0; i < stages.size(); ++i) {
        CHECK(m.timings[i].stage == stages[i]);
        CHECK(m.timings[i].millis >= 0.0);
        sum += m.timings[i].millis;
    }
    CHECK(m.total_millis > 0.0);
    CHECK(sum <= m.total_millis + 0.5); // stages cannot exceed the wall clock
}

TEST_CASE("run_extract validates its inputs") {
    TempDir dir("extract-bad");
    const auto in = stage_plan(dir, two_symbol_layout(), "mini");

    auto no_annotations = in;
    no_annotations.annotations_path.reset();
    CHECK_THROWS_AS(run_extract(no_annotations, annotation_config()), ConfigError);

    PipelineConfig template_cfg; // template mode without a template dir
    CHECK_THROWS_AS(run_extract(in, template_cfg), ConfigError);

    auto missing = in;
    missing.plan_path = dir.file("absent.png");
    CHECK_THROWS_AS(run_extract(missing, annotation_config()), UnreadableFile);

    auto bad_cfg = annotation_config();
    bad_cfg.tiling.overlap = bad_cfg.tiling.tile_size; // invalid before any file access
    CHECK_THROWS_AS(run_extract(missing, bad_cfg), ConfigError);
}

TEST_CASE("extract_to_dir writes deterministic outputs plus a manifest") {
    TempDir dir("todir");
    SyntheticPlan syn;
    const auto in = stage_plan(dir, junction_layout(), "junctions", &syn);
    const auto cfg = annotation_config();

    const auto res = extract_to_dir(in, cfg, dir.file("out1"));
    const std::vector<std::string> expected{"crossings.json", "graph.ttl", "labels.csv",
                                            "lines.json", "symbols.json", "topology.json"};
    CHECK(res.manifest.outputs == expected);
    for (const auto& name : expected)
        CHECK(fs::is_regular_file(fs::path(dir.file("out1")) / name));
    CHECK(fs::is_regular_file(fs::path(dir.file("out1")) / "manifest.json"));
    REQUIRE_FALSE(res.manifest.timings.empty());
    CHECK(res.manifest.timings.back().stage == "write");

    // The serialized topology equals the in-memory graph's export.
    CHECK(testsupport::read_file(dir.file("out1") + "/topology.json") ==
          export_json(res.graph));

    // A second run produces byte-identical deliverables; only the manifest
    // carries run-specific timings.
    extract_to_dir(in, cfg, dir.file("out2"));
    for (const auto& name : expected)
        CHECK(testsupport::read_file(dir.file("out1") + "/" + name) ==
              testsupport::read_file(dir.file("out2") + "/" + name));

    const auto manifest =
        nlohmann::json::parse(testsupport::read_file(dir.file("out1") + "/manifest.json"));
    CHECK(manifest["tool"] == "pidtwin");
    CHECK(manifest["plan"]["id"] == "junctions");
    CHECK(manifest["plan"]["path"] == in.plan_path);
    CHECK(manifest["config_hash"].get<std::string>().size() == 16);
    CHECK(manifest["outputs"].size() == 6);
    CHECK(manifest["counts"]["symbols"] == 3);
    CHECK(manifest["counts"]["connections"] == res.graph.edges.size());
    CHECK(manifest["total_millis"].get<double>() > 0.0);
}

TEST_CASE("parallel and sequential tile runs write identical bytes") {
    TempDir dir("tiles");
    LayoutSpec spec = two_symbol_layout();
    spec.cols = 4;
    spec.rows = 2;
    spec.symbols = {{"Pump", {0, 0}}, {"Valve", {3, 1}}};
    spec.conduits = {{{0, 0}, {0, 1}}, {{0, 1}, {3, 1}}};
    const auto syn = generate_synthetic_plan(spec, 1);
    const auto plan_path = dir.file("plan.png");
    save_png(syn.image, plan_path);
    write_template_dir(dir.file("templates"), spec.cell_px);

    PipelineConfig cfg;
    cfg.detect.mode = DetectMode::Template;
    cfg.detect.params.scales = {1.0};
    cfg.detect.params.right_angle_rotations = false;
    cfg.tiling.tile_size = 256;
    cfg.tiling.overlap = 64;

    ExtractInput in;
    in.plan_path = plan_path;
    in.templates_dir = dir.file("templates");
    in.parallel_tiles = true;
    extract_to_dir(in, cfg, dir.file("par"));
    in.parallel_tiles = false;
    extract_to_dir(in, cfg, dir.file("seq"));

    for (const auto& name : {"crossings.json", "graph.ttl", "labels.csv", "lines.json",
                             "symbols.json", "topology.json"})
        CHECK(testsupport::read_file(dir.file("par") + "/" + name) ==
              testsupport::read_file(dir.file("seq") + "/" + name));
}

TEST_CASE("run_eval scores symbol files paired by stem") {
    TempDir dir("eval-sym");
    fs::create_directories(dir.file("pred"));
    fs::create_directories(dir.file("truth"));

    const std::vector<SymbolDetection> a{{"Pump-1", "Pump", {10, 10, 40, 40}, 1.0},
                                         {"Valve-2", "Valve", {80, 10, 110, 40}, 1.0}};
    const std::vector<SymbolDetection> b{{"Flap-1", "Flap", {20, 20, 50, 50}, 1.0}};
    testsupport::write_file(dir.file("truth") + "/a.json", serialize_annotations("a", a));
    testsupport::write_file(dir.file("truth") + "/b.json", serialize_annotations("b", b));
    testsupport::write_file(dir.file("pred") + "/a.json", serialize_annotations("a", a));
    // b's prediction misses the flap and adds a stray pump.
    const std::vector<SymbolDetection> b_pred{{"Pump-1", "Pump", {200, 20, 230, 50}, 0.8}};
    testsupport::write_file(dir.file("pred") + "/b.json", serialize_annotations("b", b_pred));

    const auto s = run_eval(dir.file("pred"), dir.file("truth"), EvalMode::Symbols,
                            annotation_config());
    CHECK(s.mode == EvalMode::Symbols);
    CHECK(s.plan_count == 2);
    CHECK(s.counts.tp == 2);
    CHECK(s.counts.fp == 1);
    CHECK(s.counts.fn == 1);
    CHECK(s.counts.tn == 0);
    CHECK(*s.report.recall == doctest::Approx(2.0 / 3.0));
    CHECK(*s.report.precision == doctest::Approx(2.0 / 3.0));
    REQUIRE(s.curve.has_value());
    CHECK(s.curve->points.size() == 3); // pooled over both plans
}

TEST_CASE("run_eval accepts nested per-plan directories") {
    TempDir dir("eval-nested");
    const std::vector<SymbolDetection> a{{"Pump-1", "Pump", {10, 10, 40, 40}, 1.0}};
    fs::create_directories(dir.file("pred/a"));
    fs::create_directories(dir.file("truth"));
    testsupport::write_file(dir.file("pred") + "/a/symbols.json",
                            serialize_annotations("a", a));
    testsupport::write_file(dir.file("truth") + "/a.json", serialize_annotations("a", a));

    const auto s = run_eval(dir.file("pred"), dir.file("truth"), EvalMode::Symbols,
                            annotation_config());
    CHECK(s.plan_count == 1);
    CHECK(s.counts.tp == 1);
    CHECK(*s.report.f1 == 1.0);
}

TEST_CASE("run_eval scores connection graphs") {
    TempDir dir("eval-conn");
    fs::create_directories(dir.file("pred"));
    fs::create_directories(dir.file("truth"));

    TopologyGraph g;
    g.plan_id = "a";
    g.nodes = {{"Pump-1", "Pump", {0, 0, 20, 20}},
               {"Valve-2", "Valve", {40, 0, 60, 20}},
               {"Flap-3", "Flap", {80, 0, 100, 20}}};
    g.edges = {{"Pump-1", "Valve-2"}};
    testsupport::write_file(dir.file("truth") + "/a.json", export_json(g));

    TopologyGraph pred = g; // one wrong edge instead of the right one
    pred.edges = {{"Flap-3", "Valve-2"}};
    testsupport::write_file(dir.file("pred") + "/a.json", export_json(pred));

    const auto s = run_eval(dir.file("pred"), dir.file("truth"), EvalMode::Connections,
                            annotation_config());
    CHECK(s.mode == EvalMode::Connections);
    CHECK(s.counts.tp == 0);
    CHECK(s.counts.fp == 1);
    CHECK(s.counts.fn == 1);
    CHECK(s.counts.tn == 1);
    CHECK_FALSE(s.curve.has_value());
}

TEST_CASE("run_eval rejects mismatched inputs") {
    TempDir dir("eval-bad");
    fs::create_directories(dir.file("pred"));
    fs::create_directories(dir.file("truth"));
    const std::vector<SymbolDetection> a{{"Pump-1", "Pump", {10, 10, 40, 40}, 1.0}};
    testsupport::write_file(dir.file("truth") + "/a.json", serialize_annotations("a", a));
    testsupport::write_file(dir.file("pred") + "/b.json", serialize_annotations("b", a));

    CHECK_THROWS_AS(run_eval(dir.file("pred"), dir.file("truth"), EvalMode::Symbols,
                             annotation_config()),
                    SymbolSetMismatch);
    CHECK_THROWS_AS(run_eval(dir.file("nowhere"), dir.file("truth"), EvalMode::Symbols,
                             annotation_config()),
                    UnreadableFile);

    // Same stems but different node sets in connections mode.
    fs::create_directories(dir.file("cp"));
    fs::create_directories(dir.file("ct"));
    TopologyGraph t;
    t.plan_id = "c";
    t.nodes = {{"Pump-1", "Pump", {0, 0, 20, 20}}};
    TopologyGraph p;
    p.plan_id = "c";
    p.nodes = {{"Valve-9", "Valve", {0, 0, 20, 20}}};
    testsupport::write_file(dir.file("ct") + "/c.json", export_json(t));
    testsupport::write_file(dir.file("cp") + "/c.json", export_json(p));
    try {
        run_eval(dir.file("cp"), dir.file("ct"), EvalMode::Connections, annotation_config());
        FAIL("expected SymbolSetMismatch");
    } catch (const SymbolSetMismatch& e) {
        CHECK(std::string(e.what()).find("c:") != std::string::npos);
    }
}

TEST_CASE("eval reports serialize to stable JSON") {
    EvalSummary s;
    s.mode = EvalMode::Connections;
    s.plan_count = 3;
    s.counts = {5, 1, 0, 10};
    s.report = metrics(s.counts);
    const auto doc = nlohmann::json::parse(serialize_eval_report(s));
    CHECK(doc["mode"] == "connections");
    CHECK(doc["plans"] == 3);
    CHECK(doc["counts"]["tp"] == 5);
    CHECK(doc["metrics"]["recall"] == 1.0);
    CHECK(doc["metrics"]["precision"].get<double>() == doctest::Approx(5.0 / 6.0));
    CHECK_FALSE(doc.contains("ap"));

    EvalSummary empty;
    empty.report = metrics(empty.counts);
    empty.curve = PRCurve{};
    const auto doc2 = nlohmann::json::parse(serialize_eval_report(empty));
    CHECK(doc2["metrics"]["recall"].is_null());
    CHECK(doc2["ap"] == 0.0);
}

TEST_CASE("pr curves serialize to csv") {
    PRCurve c;
    c.points = {{0.9, 0.5, 1.0}, {0.7, 1.0, 0.75}};
    c.ap = 0.875;
    const auto csv = serialize_pr_csv(c);
    const auto lines = testsupport::csv_lines(csv);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "threshold,recall,precision");
    CHECK(lines[1] == "0.9,0.5,1");
    CHECK(lines[2] == "0.7,1,0.75");
}

TEST_CASE("overlay svg reflects the extraction") {
    TempDir dir("overlay");
    const auto in = stage_plan(dir, junction_layout(), "junctions");
    const auto cfg = annotation_config();
    const auto res = extract_to_dir(in, cfg, dir.file("out"));

    const auto svg =
        render_overlay_svg(res.plan, res.symbols, res.segments, res.crossings, res.graph);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.substr(svg.size() - 7) == "</svg>\n");
    CHECK(svg.find("data:image/png;base64,") != std::string::npos);

    CHECK(count_of(svg, "<line ") == res.segments.size() + res.graph.edges.size());
    CHECK(count_of(svg, "<rect ") == res.symbols.size());
    CHECK(count_of(svg, "<circle ") == res.crossings.size());
    CHECK(count_of(svg, "<text ") == res.symbols.size());

    size_t connective = 0, crossovers = 0;
    for (const auto& c : res.crossings) (c.connective ? connective : crossovers) += 1;
    CHECK(connective >= 1);  // the tee
    CHECK(crossovers >= 1);  // the bar
    CHECK(count_of(svg, "#15803d") == connective);
    CHECK(count_of(svg, "#b91c1c") == crossovers);

    // Deterministic, and identical when rebuilt from the written files.
    CHECK(render_overlay_svg(res.plan, res.symbols, res.segments, res.crossings, res.graph) ==
          svg);
    CHECK(overlay_from_dir(in.plan_path, dir.file("out")) == svg);
}

TEST_CASE("load_templates reads class-named glyphs") {
    TempDir dir("tmpl");
    fs::create_directories(dir.file("t"));
    const auto pump = render_template("Pump", 41);
    const auto valve = render_template("Valve", 41);
    auto save = [&](const Template& t, const std::string& name) {
        PlanImage img = PlanImage::filled(t.mask.width(), t.mask.height(), 255);
        for (uint32_t y = 0; y < t.mask.height(); ++y)
            for (uint32_t x = 0; x < t.mask.width(); ++x)
                if (t.mask.at(x, y)) img.set(x, y, 0);
        save_png(img, dir.file("t") + "/" + name);
    };
    save(pump, "Pump.png");
    save(valve, "Valve-2.png"); // variant suffix
    save(pump, "pump-extra.png"); // lowercase resolves through the registry
    testsupport::write_file(dir.file("t") + "/notes.txt", "ignored");

    const auto loaded = load_templates(dir.file("t"), ClassRegistry::defaults());
    REQUIRE(loaded.size() == 3);
    CHECK(loaded[0].cls == "Pump");
    CHECK(loaded[1].cls == "Valve");
    CHECK(loaded[2].cls == "Pump");
    CHECK(loaded[0].mask == pump.mask);
    CHECK(loaded[1].mask == valve.mask);

    fs::create_directories(dir.file("empty"));
    CHECK_THROWS_AS(load_templates(dir.file("empty"), ClassRegistry::defaults()),
                    EmptyTemplateSet);
    CHECK_THROWS_AS(load_templates(dir.file("missing"), ClassRegistry::defaults()),
                    UnreadableFile);

    save(pump, "Widget.png");
    CHECK_THROWS_AS(load_templates(dir.file("t"), ClassRegistry::defaults()),
                    SchemaViolation);
}

TEST_SUITE_END();
