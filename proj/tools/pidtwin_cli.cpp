// pidtwin command line: extract | eval | overlay | fixtures.
//
// Exit codes: 0 success, 1 configuration error, 2 input error,
// 3 pipeline error. Diagnostics go to standard error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pidtwin/config.hpp"
#include "pidtwin/errors.hpp"
#include "pidtwin/pipeline.hpp"
#include "pidtwin/synthetic.hpp"
#include "pidtwin/twin_export.hpp"

#ifndef PIDTWIN_VERSION
#define PIDTWIN_VERSION "0.0.0"
#endif

namespace {

namespace fs = std::filesystem;
using namespace pidtwin;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UnreadableFile("cannot open for writing: " + path);
    out << content;
    if (!out) throw UnreadableFile("short write: " + path);
}

PipelineConfig resolve_config(const std::optional<std::string>& config_path,
                              const std::optional<std::string>& detector_mode) {
    PipelineConfig cfg;
    if (config_path) {
        cfg = load_config(*config_path); // parse, then env overrides
    } else {
        apply_env_overrides(cfg);
    }
    if (detector_mode) cfg.detect.mode = parse_detect_mode(*detector_mode); // flag wins
    validate(cfg);
    return cfg;
}

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

int cmd_extract(const std::string& plan, const std::optional<std::string>& config_path,
                const std::string& out_dir, const std::optional<std::string>& detector_mode,
                const std::optional<std::string>& annotations,
                const std::optional<std::string>& templates, bool sequential) {
    const PipelineConfig cfg = resolve_config(config_path, detector_mode);
    ExtractInput in;
    in.plan_path = plan;
    in.annotations_path = annotations;
    in.templates_dir = templates;
    in.parallel_tiles = !sequential;
    const ExtractResult res = extract_to_dir(in, cfg, out_dir);
    std::cout << "plan " << res.plan.source_id() << ": " << res.symbols.size() << " symbols, "
              << res.segments.size() << " segments, " << res.crossings.size()
              << " crossings, " << res.graph.edges.size() << " connections -> " << out_dir
              << "\n";
    return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& truth_dir,
             const std::string& mode_name, const std::optional<std::string>& config_path,
             const std::optional<std::string>& out_dir) {
    const PipelineConfig cfg = resolve_config(config_path, std::nullopt);
    EvalMode mode;
    if (mode_name == "symbols") {
        mode = EvalMode::Symbols;
    } else if (mode_name == "connections") {
        mode = EvalMode::Connections;
    } else {
        throw ConfigError("eval mode must be 'symbols' or 'connections', got '" + mode_name +
                          "'");
    }

    const EvalSummary s = run_eval(pred_dir, truth_dir, mode, cfg);
    if (s.plan_count == 0)
        std::cerr << "warning: no evaluation pairs found; metrics are undefined\n";

    std::cout << "mode        " << mode_name << "\n";
    std::cout << "plans       " << s.plan_count << "\n";
    std::cout << "counts      tp=" << s.counts.tp << " fp=" << s.counts.fp
              << " fn=" << s.counts.fn << " tn=" << s.counts.tn << "\n";
    auto row = [](const char* name, const std::optional<double>& v) {
        std::cout << name << (v ? fmt4(*v) : std::string("undefined")) << "\n";
    };
    row("recall      ", s.report.recall);
    row("precision   ", s.report.precision);
    row("f1          ", s.report.f1);
    row("accuracy    ", s.report.accuracy);
    row("specificity ", s.report.specificity);
    row("npv         ", s.report.npv);
    if (s.curve) std::cout << "ap          " << fmt4(s.curve->ap) << "\n";

    if (out_dir) {
        fs::create_directories(*out_dir);
        write_file((fs::path(*out_dir) / "report.json").string(), serialize_eval_report(s));
        if (s.curve)
            write_file((fs::path(*out_dir) / "pr.csv").string(), serialize_pr_csv(*s.curve));
    }
    return 0;
}

int cmd_overlay(const std::string& plan, const std::string& extract_dir,
                const std::string& out_path) {
    const std::string svg = overlay_from_dir(plan, extract_dir);
    if (out_path == "-") {
        std::cout << svg;
    } else {
        write_file(out_path, svg);
        std::cout << "overlay -> " << out_path << "\n";
    }
    return 0;
}

int cmd_fixtures(const std::string& out_dir, int count, uint64_t seed, int symbols, int stubs,
                 int bars, double noise, double skew) {
    fs::create_directories(fs::path(out_dir) / "plans");
    RandomLayoutParams params;
    params.symbol_count = symbols;
    params.extra_stubs = stubs;
    params.crossover_bars = bars;
    // Widen the grid when the requested content outgrows the default.
    params.cols = std::max(params.cols, symbols + stubs + bars + 1);

    for (int i = 0; i < count; ++i) {
        const uint64_t plan_seed = seed + uint64_t(i);
        LayoutSpec spec = random_layout(params, plan_seed);
        spec.plan_id = "fixture-" + std::to_string(plan_seed);
        spec.noise = noise;
        spec.skew_deg = skew;
        const SyntheticPlan plan = generate_synthetic_plan(spec, plan_seed);

        save_png(plan.image, (fs::path(out_dir) / "plans" / (spec.plan_id + ".png")).string());
        const fs::path truth_dir = fs::path(out_dir) / "truth" / spec.plan_id;
        fs::create_directories(truth_dir);
        write_file((truth_dir / "symbols.json").string(),
                   serialize_annotations(spec.plan_id, plan.symbols));
        TopologyGraph g = matrix_to_graph(plan.truth, plan.symbols);
        g.plan_id = spec.plan_id;
        write_file((truth_dir / "topology.json").string(), export_json(g));
    }

    // Matching glyph templates for template-mode runs.
    const fs::path tdir = fs::path(out_dir) / "templates";
    fs::create_directories(tdir);
    const uint32_t box = 2 * std::max(10u, RandomLayoutParams{}.cell_px / 5) + 1;
    for (const Template& t : reference_templates(box)) {
        PlanImage img = PlanImage::filled(t.mask.width(), t.mask.height(), 255, t.cls);
        for (uint32_t y = 0; y < t.mask.height(); ++y)
            for (uint32_t x = 0; x < t.mask.width(); ++x)
                if (t.mask.at(x, y)) img.set(x, y, 0);
        save_png(img, (tdir / (t.cls + ".png")).string());
    }

    std::cout << count << " fixtures -> " << out_dir << "\n";
    return 0;
}

int guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const UnmappedClass& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const TemplateFieldUnknown& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const LabelCollision& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const UnreadableFile& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedFormat& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaViolation& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const BoxOutOfBounds& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const SymbolSetMismatch& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const EmptyTemplateSet& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidTiling& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleLayout& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"P&ID digitization pipeline for building energy systems"};
    app.set_version_flag("--version", PIDTWIN_VERSION);
    app.require_subcommand(1);

    // extract
    auto* extract = app.add_subcommand("extract", "Run the pipeline on one plan");
    std::string plan_path, out_dir;
    std::optional<std::string> config_path, detector_mode, annotations, templates;
    bool sequential = false;
    extract->add_option("plan", plan_path, "Plan raster (PNG or JPEG)")->required();
    extract->add_option("--config", config_path, "Pipeline config file");
    extract->add_option("--out", out_dir, "Output directory")->required();
    extract->add_option("--detector-mode", detector_mode,
                        "template | annotations | external (overrides config)");
    extract->add_option("--annotations", annotations,
                        "Annotation JSON for annotations/external mode");
    extract->add_option("--templates", templates, "Template directory for template mode");
    extract->add_flag("--sequential", sequential, "Disable tile parallelism");

    // eval
    auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    std::string pred_dir, truth_dir, eval_mode = "symbols";
    std::optional<std::string> eval_config, eval_out;
    eval->add_option("--pred", pred_dir, "Prediction directory")->required();
    eval->add_option("--truth", truth_dir, "Ground-truth directory")->required();
    eval->add_option("--mode", eval_mode, "symbols | connections");
    eval->add_option("--config", eval_config, "Pipeline config file");
    eval->add_option("--out", eval_out, "Directory for report.json and pr.csv");

    // overlay
    auto* overlay = app.add_subcommand("overlay", "Render a debug SVG overlay");
    std::string ov_plan, ov_dir, ov_out = "-";
    overlay->add_option("plan", ov_plan, "Plan raster")->required();
    overlay->add_option("--extract-dir", ov_dir, "Directory written by extract")->required();
    overlay->add_option("--out", ov_out, "Output SVG path, or - for stdout");

    // fixtures
    auto* fixtures = app.add_subcommand("fixtures", "Generate synthetic plans with truth");
    std::string fx_out;
    int fx_count = 10, fx_symbols = 6, fx_stubs = 2, fx_bars = 0;
    uint64_t fx_seed = 1;
    double fx_noise = 0.0, fx_skew = 0.0;
    fixtures->add_option("--out", fx_out, "Output directory")->required();
    fixtures->add_option("--count", fx_count, "Number of plans");
    fixtures->add_option("--seed", fx_seed, "Base seed; plan i uses seed + i");
    fixtures->add_option("--symbols", fx_symbols, "Symbols per plan");
    fixtures->add_option("--stubs", fx_stubs, "Dead-end stubs per plan");
    fixtures->add_option("--crossover-bars", fx_bars, "Non-connecting crossover bars");
    fixtures->add_option("--noise", fx_noise, "Salt-and-pepper pixel fraction");
    fixtures->add_option("--skew", fx_skew, "Rotation in degrees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // bad invocation is a config error
    }

    if (extract->parsed())
        return guarded([&] {
            return cmd_extract(plan_path, config_path, out_dir, detector_mode, annotations,
                               templates, sequential);
        });
    if (eval->parsed())
        return guarded(
            [&] { return cmd_eval(pred_dir, truth_dir, eval_mode, eval_config, eval_out); });
    if (overlay->parsed())
        return guarded([&] { return cmd_overlay(ov_plan, ov_dir, ov_out); });
    if (fixtures->parsed())
        return guarded([&] {
            return cmd_fixtures(fx_out, fx_count, fx_seed, fx_symbols, fx_stubs, fx_bars,
                                fx_noise, fx_skew);
        });
    return 1;
}
