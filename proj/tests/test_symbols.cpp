#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pidtwin/errors.hpp"
#include "pidtwin/symbols.hpp"
#include "pidtwin/synthetic.hpp"
#include "support.hpp"

using namespace pidtwin;
using testsupport::TempDir;

namespace {

/// Stamps a binary mask as black ink onto a white plan.
void stamp(PlanImage& plan, const BinaryImage& mask, uint32_t ox, uint32_t oy) {
    for (uint32_t y = 0; y < mask.height(); ++y)
        for (uint32_t x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) plan.set(ox + x, oy + y, 0);
}

/// Independent zero-mean NCC of a binary mask against a binary image at one
/// window position; brute force, no integral images.
double ncc_at(const BinaryImage& bin, const BinaryImage& mask, uint32_t ox, uint32_t oy) {
    const double n = double(mask.width()) * double(mask.height());
    double st = 0.0, sx = 0.0, sxt = 0.0;
    for (uint32_t y = 0; y < mask.height(); ++y) {
        for (uint32_t x = 0; x < mask.width(); ++x) {
            const double t = mask.at(x, y) ? 1.0 : 0.0;
            const double v = bin.at(ox + x, oy + y) ? 1.0 : 0.0;
            st += t;
            sx += v;
            sxt += t * v;
        }
    }
    const double den = std::sqrt(sx * (n - sx)) * std::sqrt(st * (n - st));
    if (den == 0.0) return 0.0;
    return (n * sxt - sx * st) / den;
}

BinaryImage rot90(const BinaryImage& src) {
    BinaryImage out(src.height(), src.width());
    for (uint32_t y = 0; y < src.height(); ++y)
        for (uint32_t x = 0; x < src.width(); ++x)
            if (src.at(x, y)) out.set(src.height() - 1 - y, x, true);
    return out;
}

SymbolDetection det(std::string id, std::string cls, BoundingBox box, double score = 1.0) {
    SymbolDetection d;
    d.id = std::move(id);
    d.cls = std::move(cls);
    d.bbox = box;
    d.score = score;
    return d;
}

} // namespace

TEST_SUITE_BEGIN("symbols");

TEST_CASE("class registry resolves case-insensitively") {
    const ClassRegistry reg = ClassRegistry::defaults();
    CHECK(reg.names() == std::vector<std::string>{"Pump", "Valve", "HeatExchanger", "Flap"});
    CHECK(reg.resolve("pump") == "Pump");
    CHECK(reg.resolve("HEATEXCHANGER") == "HeatExchanger");
    CHECK_FALSE(reg.resolve("Boiler").has_value());

    ClassRegistry extra = ClassRegistry::defaults();
    CHECK_THROWS_AS(extra.add("pump"), Error); // duplicate modulo case
    CHECK_THROWS_AS(extra.add(""), Error);
}

TEST_CASE("exact template copy is detected with full score") {
    const Template tpl = render_template("Pump", 41);
    PlanImage plan = PlanImage::filled(200, 160, 255);
    stamp(plan, tpl.mask, 60, 70);

    TemplateMatchParams params;
    params.threshold = 0.9;
    params.scales = {1.0};
    params.right_angle_rotations = false;
    const auto hits = detect_templates(plan, {tpl}, params);

    REQUIRE(hits.size() == 1);
    CHECK(hits[0].cls == "Pump");
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hits[0].bbox == BoundingBox{60, 70, 60 + double(tpl.mask.width()),
                                      70 + double(tpl.mask.height())});
}

TEST_CASE("blank plan yields no detections") {
    const Template tpl = render_template("Valve", 41);
    CHECK(detect_templates(PlanImage::filled(120, 120, 255), {tpl}).empty());
    CHECK_THROWS_AS(detect_templates(PlanImage::filled(120, 120, 255), {}), EmptyTemplateSet);
}

TEST_CASE("rotated glyph is found via the right-angle variants") {
    const Template tpl = render_template("Flap", 41);
    const BinaryImage turned = rot90(tpl.mask);
    PlanImage plan = PlanImage::filled(160, 160, 255);
    stamp(plan, turned, 40, 55);

    TemplateMatchParams params;
    params.threshold = 0.9;
    params.scales = {1.0};
    params.right_angle_rotations = true;
    const auto hits = detect_templates(plan, {tpl}, params);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].bbox == BoundingBox{40, 55, 40 + double(turned.width()),
                                      55 + double(turned.height())});

    // Exhaustive-correlation oracle: the detection sits at the argmax window.
    const BinaryImage bin = binarize(plan);
    double best = -2.0;
    uint32_t bx = 0, by = 0;
    for (uint32_t y = 0; y + turned.height() <= bin.height(); ++y) {
        for (uint32_t x = 0; x + turned.width() <= bin.width(); ++x) {
            const double v = ncc_at(bin, turned, x, y);
            if (v > best) {
                best = v;
                bx = x;
                by = y;
            }
        }
    }
    CHECK(best == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(double(bx) == hits[0].bbox.x_min);
    CHECK(double(by) == hits[0].bbox.y_min);
}

TEST_CASE("suppression keeps the strongest of overlapping same-class boxes") {
    // IoU of the two boxes by area arithmetic: inter 8x10 = 80, union
    // 100 + 100 - 80 = 120, IoU 2/3 >= 0.5.
    const auto a = det("a", "Pump", {0, 0, 10, 10}, 0.9);
    const auto b = det("b", "Pump", {2, 0, 12, 10}, 0.8);
    CHECK(iou(a.bbox, b.bbox) == doctest::Approx(80.0 / 120.0));

    const auto kept = suppress_overlaps({a, b}, 0.5);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].score == 0.9);
}

TEST_CASE("suppression is per class") {
    const auto a = det("a", "Pump", {0, 0, 10, 10}, 0.9);
    const auto b = det("b", "Valve", {0, 0, 10, 10}, 0.8);
    CHECK(suppress_overlaps({a, b}, 0.5).size() == 2);
}

TEST_CASE("suppression is idempotent") {
    std::mt19937_64 rng(31);
    const std::vector<std::string> classes = {"Pump", "Valve", "Flap"};
    std::vector<SymbolDetection> dets;
    for (int i = 0; i < 60; ++i) {
        const double x = double(rng() % 200);
        const double y = double(rng() % 200);
        const double w = 5.0 + double(rng() % 30);
        const double h = 5.0 + double(rng() % 30);
        dets.push_back(det("d" + std::to_string(i), classes[rng() % classes.size()],
                           {x, y, x + w, y + h}, double(rng() % 1000) / 999.0));
    }
    const auto once = suppress_overlaps(dets, 0.5);
    const auto twice = suppress_overlaps(once, 0.5);
    CHECK(once == twice);
}

TEST_CASE("tile merge translates boxes and dedups across seams") {
    Tile left;
    left.image = PlanImage::filled(100, 100, 255);
    Tile right;
    right.image = PlanImage::filled(100, 100, 255);
    right.offset_x = 80;

    // Same physical symbol seen by both tiles: plan box (84,10,96,20) vs
    // (84,10,98,20); IoU = 120 / (120 + 140 - 120) = 6/7 >= 0.5.
    const auto a = det("t0", "Valve", {84, 10, 96, 20}, 0.7);
    const auto b = det("t1", "Valve", {4, 10, 18, 20}, 0.9);
    CHECK(iou({84, 10, 96, 20}, {84, 10, 98, 20}) == doctest::Approx(120.0 / 140.0));

    const auto merged = merge_tile_detections({{left, {a}}, {right, {b}}}, 0.5);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].bbox == BoundingBox{84, 10, 98, 20}); // higher score won
    CHECK(merged[0].score == 0.9);

    // Disjoint detections in different tiles are all kept.
    const auto c = det("t2", "Pump", {10, 40, 20, 50}, 0.8);
    CHECK(merge_tile_detections({{left, {a}}, {right, {c}}}, 0.5).size() == 2);
}

TEST_CASE("assign_ids numbers symbols in reading order") {
    std::vector<SymbolDetection> dets = {
        det("x", "Valve", {50, 40, 60, 50}),
        det("y", "Pump", {10, 10, 20, 20}),
        det("z", "Flap", {30, 10, 40, 20}),
    };
    const auto out = assign_ids(dets);
    REQUIRE(out.size() == 3);
    CHECK(out[0].id == "Pump-1");
    CHECK(out[1].id == "Flap-2");
    CHECK(out[2].id == "Valve-3");
}

TEST_CASE("annotations round-trip through serialization") {
    TempDir dir("ann");
    const std::vector<SymbolDetection> symbols = {
        det("Valve-1", "Valve", {10.5, 20.25, 30, 40}, 0.75),
        det("Pump-2", "Pump", {50, 60, 70, 80}, 1.0),
    };
    testsupport::write_file(dir.file("symbols.json"),
                            serialize_annotations("plan-1", symbols));

    const PlanImage plan = PlanImage::filled(100, 100, 255);
    CHECK(ingest_annotations(dir.file("symbols.json"), plan) == symbols);
    CHECK(read_annotations(dir.file("symbols.json")) == symbols);
}

TEST_CASE("annotation ids and defaults follow the file") {
    TempDir dir("ann");
    testsupport::write_file(dir.file("a.json"), R"({
      "plan": "p",
      "symbols": [
        {"id": "Valve-1", "class": "valve", "bbox": [0, 0, 10, 10]},
        {"id": "Valve-2", "class": "Valve", "bbox": [20, 0, 30, 10]},
        {"id": "Flap-3", "class": "Flap", "bbox": [40, 0, 50, 10]},
        {"id": "Pump-4", "class": "Pump", "bbox": [0, 20, 10, 30]},
        {"class": "Pump", "bbox": [20, 20, 30, 30], "score": 0.5}
      ]
    })");
    const auto syms = read_annotations(dir.file("a.json"));
    REQUIRE(syms.size() == 5);
    CHECK(syms[0].id == "Valve-1");
    CHECK(syms[0].cls == "Valve"); // canonical spelling restored
    CHECK(syms[1].id == "Valve-2");
    CHECK(syms[2].id == "Flap-3");
    CHECK(syms[3].id == "Pump-4");
    CHECK(syms[4].id == "Pump-5"); // missing id: class + 1-based position
    CHECK(syms[3].score == 1.0);   // missing score defaults to 1
    CHECK(syms[4].score == 0.5);
}

TEST_CASE("annotation ingestion rejects malformed input") {
    TempDir dir("ann");
    const PlanImage plan = PlanImage::filled(50, 50, 255);

    auto expect = [&](const std::string& body, auto tag) {
        using E = decltype(tag);
        testsupport::write_file(dir.file("bad.json"), body);
        CHECK_THROWS_AS(ingest_annotations(dir.file("bad.json"), plan), E);
    };

    expect("{ not json", SchemaViolation{""});
    expect(R"([1, 2])", SchemaViolation{""});
    expect(R"({"plan": "p"})", SchemaViolation{""});
    expect(R"({"plan": "p", "symbols": [{"class": "Boiler", "bbox": [0,0,1,1]}]})",
           SchemaViolation{""});
    expect(R"({"plan": "p", "symbols": [{"class": "Pump", "bbox": [0,0,1]}]})",
           SchemaViolation{""});
    expect(R"({"plan": "p", "symbols": [{"class": "Pump", "bbox": [5,5,1,6]}]})",
           SchemaViolation{""}); // x_min > x_max
    expect(R"({"plan": "p", "symbols": [{"class": "Pump", "bbox": [0,0,10,60]}]})",
           BoxOutOfBounds{""}); // below the plan
    expect(R"({"plan": "p", "symbols": [{"class": "Pump", "bbox": [0,0,1,1], "score": 2}]})",
           SchemaViolation{""});
    expect(R"({"plan": "p", "symbols": [
             {"id": "A", "class": "Pump", "bbox": [0,0,1,1]},
             {"id": "A", "class": "Pump", "bbox": [2,2,3,3]}]})",
           SchemaViolation{""}); // duplicate id
    CHECK_THROWS_AS(ingest_annotations(dir.file("missing.json"), plan), UnreadableFile);
}

TEST_CASE("detection results are deterministic") {
    const Template tpl = render_template("HeatExchanger", 41);
    PlanImage plan = PlanImage::filled(300, 200, 255);
    stamp(plan, tpl.mask, 30, 40);
    stamp(plan, tpl.mask, 180, 100);

    TemplateMatchParams params;
    params.scales = {1.0};
    const auto a = detect_templates(plan, {tpl}, params);
    const auto b = detect_templates(plan, {tpl}, params);
    CHECK(a == b);
    CHECK(a.size() == 2);
}

TEST_SUITE_END();
