// Microbenchmarks for the pipeline's hot stages. All inputs are synthetic
// and generated once per benchmark, so results track the algorithms, not I/O.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include <pidtwin/crossings.hpp>
#include <pidtwin/eval.hpp>
#include <pidtwin/lines.hpp>
#include <pidtwin/symbols.hpp>
#include <pidtwin/synthetic.hpp>
#include <pidtwin/topology.hpp>
#include <pidtwin/twin_export.hpp>

namespace {

using namespace pidtwin;

SyntheticPlan busy_plan() {
    RandomLayoutParams params;
    params.cols = 12;
    params.rows = 6;
    params.symbol_count = 8;
    params.extra_stubs = 2;
    params.crossover_bars = 2;
    return generate_synthetic_plan(random_layout(params, 7), 7);
}

void BM_Binarize(benchmark::State& state) {
    const SyntheticPlan plan = busy_plan();
    for (auto _ : state) benchmark::DoNotOptimize(binarize(plan.image));
    state.SetItemsProcessed(int64_t(state.iterations()) * plan.image.width() *
                            plan.image.height());
}
BENCHMARK(BM_Binarize);

void BM_HoughSegments(benchmark::State& state) {
    LineFieldSpec spec;
    spec.line_count = int(state.range(0));
    const LineField field = generate_line_field(spec, 3);
    const BinaryImage bin = binarize(field.image);
    for (auto _ : state) benchmark::DoNotOptimize(hough_segments(bin));
}
BENCHMARK(BM_HoughSegments)->Arg(4)->Arg(8);

void BM_MergeSegments(benchmark::State& state) {
    // Fragmented bus: many collinear runs that merge pairwise into one.
    std::vector<LineSegment> frags;
    for (int i = 0; i < int(state.range(0)); ++i)
        frags.push_back(make_segment("Line-" + std::to_string(i + 1),
                                     {double(i * 40), 100.0}, {double(i * 40 + 35), 100.0}));
    for (auto _ : state) benchmark::DoNotOptimize(merge_segments(frags));
}
BENCHMARK(BM_MergeSegments)->Arg(16)->Arg(64);

void BM_TemplateMatch(benchmark::State& state) {
    LayoutSpec spec;
    spec.cols = 4;
    spec.rows = 3;
    spec.symbols = {{"Pump", {0, 1}}, {"Valve", {3, 1}}, {"HeatExchanger", {1, 0}}};
    spec.conduits = {{{0, 1}, {3, 1}}, {{1, 0}, {1, 1}}};
    const SyntheticPlan plan = generate_synthetic_plan(spec, 5);
    const std::vector<Template> templates = reference_templates(49);
    TemplateMatchParams params;
    params.scales = {1.0};
    params.right_angle_rotations = false;
    for (auto _ : state)
        benchmark::DoNotOptimize(detect_templates(plan.image, templates, params));
}
BENCHMARK(BM_TemplateMatch)->Unit(benchmark::kMillisecond);

void BM_FindCrossings(benchmark::State& state) {
    // Dense grid: n horizontal and n vertical lines, n^2 crossover points.
    const int n = int(state.range(0));
    std::vector<LineSegment> segs;
    for (int i = 0; i < n; ++i) {
        segs.push_back(make_segment("H-" + std::to_string(i + 1), {0.0, double(40 * i)},
                                    {double(40 * n), double(40 * i)}));
        segs.push_back(make_segment("V-" + std::to_string(i + 1), {double(40 * i), 0.0},
                                    {double(40 * i), double(40 * n)}));
    }
    for (auto _ : state) benchmark::DoNotOptimize(find_crossings(segs));
}
BENCHMARK(BM_FindCrossings)->Arg(8)->Arg(16);

void BM_DeriveConnections(benchmark::State& state) {
    const SyntheticPlan plan = busy_plan();
    const auto merged = merge_segments(hough_segments(
        mask_symbols(binarize(plan.image), plan.symbols, 2.0)));
    const auto crossings = find_crossings(merged);
    for (auto _ : state)
        benchmark::DoNotOptimize(derive_connections(plan.symbols, merged, crossings));
}
BENCHMARK(BM_DeriveConnections);

void BM_ExportGraph(benchmark::State& state) {
    const SyntheticPlan plan = busy_plan();
    const TopologyGraph graph = matrix_to_graph(plan.truth, plan.symbols);
    const ClassMapping map = ClassMapping::defaults();
    for (auto _ : state) {
        benchmark::DoNotOptimize(export_turtle(graph, map));
        benchmark::DoNotOptimize(export_json(graph));
    }
}
BENCHMARK(BM_ExportGraph);

} // namespace

BENCHMARK_MAIN();
