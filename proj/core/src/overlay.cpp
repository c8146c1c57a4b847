#include <filesystem>
#include <map>
#include <string>

#include "image_io.hpp"
#include "pidtwin/errors.hpp"
#include "pidtwin/pipeline.hpp"
#include "pidtwin/twin_export.hpp"
#include "textio.hpp"

namespace pidtwin {

namespace {

std::string base64(const std::vector<uint8_t>& data) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        const uint32_t v = uint32_t(data[i]) << 16 | uint32_t(data[i + 1]) << 8 | data[i + 2];
        out += alphabet[v >> 18];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
    }
    if (i + 1 == data.size()) {
        const uint32_t v = uint32_t(data[i]) << 16;
        out += alphabet[v >> 18];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == data.size()) {
        const uint32_t v = uint32_t(data[i]) << 16 | uint32_t(data[i + 1]) << 8;
        out += alphabet[v >> 18];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += "=";
    }
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return detail::fmt_double(v); }

} // namespace

std::string render_overlay_svg(const PlanImage& plan,
                               const std::vector<SymbolDetection>& symbols,
                               const std::vector<LineSegment>& segments,
                               const std::vector<LineCrossing>& crossings,
                               const TopologyGraph& graph) {
    const std::string w = std::to_string(plan.width());
    const std::string h = std::to_string(plan.height());
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h +
           "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
    svg += "  <image width=\"" + w + "\" height=\"" + h +
           "\" image-rendering=\"pixelated\" href=\"data:image/png;base64," +
           base64(detail::encode_png_gray_mem(plan.width(), plan.height(), plan.pixels())) +
           "\"/>\n";

    svg += "  <g stroke=\"#1668a8\" stroke-width=\"1.5\" opacity=\"0.9\">\n";
    for (const auto& s : segments) {
        svg += "    <line x1=\"" + num(s.p1.x) + "\" y1=\"" + num(s.p1.y) + "\" x2=\"" +
               num(s.p2.x) + "\" y2=\"" + num(s.p2.y) + "\"><title>" + xml_escape(s.id) +
               "</title></line>\n";
    }
    svg += "  </g>\n";

    // Derived connections as dashed chords between symbol box centers.
    std::map<std::string, Point> centers;
    for (const auto& n : graph.nodes) centers[n.id] = n.bbox.center();
    svg += "  <g stroke=\"#7a4fa8\" stroke-width=\"1\" stroke-dasharray=\"6 4\" "
           "opacity=\"0.8\">\n";
    for (const auto& [a, b] : graph.edges) {
        const auto ca = centers.find(a);
        const auto cb = centers.find(b);
        if (ca == centers.end() || cb == centers.end()) continue;
        svg += "    <line x1=\"" + num(ca->second.x) + "\" y1=\"" + num(ca->second.y) +
               "\" x2=\"" + num(cb->second.x) + "\" y2=\"" + num(cb->second.y) + "\"><title>" +
               xml_escape(a) + " - " + xml_escape(b) + "</title></line>\n";
    }
    svg += "  </g>\n";

    svg += "  <g fill=\"none\" stroke=\"#d97706\" stroke-width=\"1.5\">\n";
    for (const auto& s : symbols) {
        svg += "    <rect x=\"" + num(s.bbox.x_min) + "\" y=\"" + num(s.bbox.y_min) +
               "\" width=\"" + num(s.bbox.x_max - s.bbox.x_min) + "\" height=\"" +
               num(s.bbox.y_max - s.bbox.y_min) + "\"><title>" + xml_escape(s.id) +
               "</title></rect>\n";
    }
    svg += "  </g>\n";
    svg += "  <g fill=\"#d97706\" font-family=\"sans-serif\" font-size=\"10\">\n";
    for (const auto& s : symbols) {
        svg += "    <text x=\"" + num(s.bbox.x_min) + "\" y=\"" + num(s.bbox.y_min - 3.0) +
               "\">" + xml_escape(s.id) + "</text>\n";
    }
    svg += "  </g>\n";

    // Crossings: green = connective junction, red = crossover.
    svg += "  <g stroke=\"#222222\" stroke-width=\"0.75\">\n";
    for (const auto& c : crossings) {
        svg += std::string("    <circle fill=\"") +
               (c.connective ? "#15803d" : "#b91c1c") + "\" cx=\"" + num(c.at.x) + "\" cy=\"" +
               num(c.at.y) + "\" r=\"4\"><title>" + xml_escape(c.id) + " degree " +
               std::to_string(c.degree) + "</title></circle>\n";
    }
    svg += "  </g>\n";
    svg += "</svg>\n";
    return svg;
}

std::string overlay_from_dir(const std::string& plan_path, const std::string& extract_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(extract_dir);
    const PlanImage plan = load_plan(plan_path);
    const TopologyGraph graph = read_topology_json((dir / "topology.json").string());

    ClassRegistry registry = ClassRegistry::defaults();
    for (const auto& n : graph.nodes)
        if (!registry.resolve(n.cls)) registry.add(n.cls);

    const auto symbols = read_annotations((dir / "symbols.json").string(), registry);
    const auto segments = parse_segments(detail::read_text_file((dir / "lines.json").string()));
    const auto crossings =
        parse_crossings(detail::read_text_file((dir / "crossings.json").string()));
    return render_overlay_svg(plan, symbols, segments, crossings, graph);
}

} // namespace pidtwin
