#include "pidtwin/plan.hpp"

#include <cmath>
#include <filesystem>

#include "pidtwin/errors.hpp"
#include "image_io.hpp"

namespace pidtwin {

PlanImage::PlanImage(uint32_t width, uint32_t height, std::vector<uint8_t> pixels,
                     std::string source_id)
    : width_(width), height_(height), pixels_(std::move(pixels)),
      source_id_(std::move(source_id)) {
    if (pixels_.size() != size_t(width_) * height_)
        throw Error("PlanImage: pixel count does not match width x height");
}

PlanImage PlanImage::filled(uint32_t width, uint32_t height, uint8_t intensity,
                            std::string source_id) {
    return PlanImage(width, height,
                     std::vector<uint8_t>(size_t(width) * height, intensity),
                     std::move(source_id));
}

uint8_t luminance(uint8_t r, uint8_t g, uint8_t b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return uint8_t(std::lround(y));
}

PlanImage load_plan(const std::string& path, std::optional<int> /*dpi_hint*/) {
    detail::RawImage raw;
    switch (detail::sniff_file_kind(path)) {
    case detail::FileKind::Png:
        raw = detail::decode_png(path);
        break;
    case detail::FileKind::Jpeg:
        raw = detail::decode_jpeg(path);
        break;
    case detail::FileKind::Pdf:
        throw UnsupportedFormat("PDF input is not supported: " + path +
                                " (rasterize it to PNG or JPEG first, e.g. with pdftoppm)");
    default:
        throw UnsupportedFormat("unrecognized image format: " + path +
                                " (expected PNG or JPEG)");
    }

    std::vector<uint8_t> gray(size_t(raw.width) * raw.height);
    if (raw.channels == 1) {
        gray = std::move(raw.data);
    } else {
        for (size_t i = 0; i < gray.size(); ++i) {
            const uint8_t* px = raw.data.data() + i * 3;
            gray[i] = luminance(px[0], px[1], px[2]);
        }
    }
    // The id is the file stem: exports stay byte-identical wherever the file lives.
    return PlanImage(raw.width, raw.height, std::move(gray),
                     std::filesystem::path(path).stem().string());
}

void save_png(const PlanImage& image, const std::string& path) {
    detail::encode_png_gray(path, image.width(), image.height(), image.pixels());
}

namespace {

// Offsets along one axis: fixed stride, last tile clamped to the plan edge.
std::vector<uint32_t> axis_offsets(uint32_t plan, uint32_t tile, uint32_t stride) {
    std::vector<uint32_t> out;
    if (tile >= plan) {
        out.push_back(0);
        return out;
    }
    uint32_t off = 0;
    while (off + tile < plan) {
        out.push_back(off);
        off += stride;
    }
    out.push_back(plan - tile);
    return out;
}

} // namespace

std::vector<Tile> decompose(const PlanImage& plan, uint32_t tile_size, uint32_t overlap) {
    if (plan.width() == 0 || plan.height() == 0)
        throw InvalidTiling("decompose: plan is empty");
    if (tile_size == 0 || tile_size <= 2 * overlap)
        throw InvalidTiling("decompose: tile_size must exceed twice the overlap");

    const uint32_t stride = tile_size - overlap;
    const auto xs = axis_offsets(plan.width(), tile_size, stride);
    const auto ys = axis_offsets(plan.height(), tile_size, stride);

    std::vector<Tile> tiles;
    tiles.reserve(xs.size() * ys.size());
    for (uint32_t r = 0; r < ys.size(); ++r) {
        for (uint32_t c = 0; c < xs.size(); ++c) {
            const uint32_t ox = xs[c];
            const uint32_t oy = ys[r];
            const uint32_t w = std::min(tile_size, plan.width() - ox);
            const uint32_t h = std::min(tile_size, plan.height() - oy);

            std::vector<uint8_t> px(size_t(w) * h);
            for (uint32_t y = 0; y < h; ++y)
                for (uint32_t x = 0; x < w; ++x)
                    px[size_t(y) * w + x] = plan.at(ox + x, oy + y);

            Tile t;
            t.image = PlanImage(w, h, std::move(px), plan.source_id());
            t.offset_x = ox;
            t.offset_y = oy;
            t.row = r;
            t.col = c;
            tiles.push_back(std::move(t));
        }
    }
    return tiles;
}

BoundingBox to_plan_coords(const Tile& tile, const BoundingBox& local) {
    if (!local.valid() || local.x_min < 0.0 || local.y_min < 0.0 ||
        local.x_max > double(tile.image.width()) || local.y_max > double(tile.image.height()))
        throw OutOfTile("to_plan_coords: box exceeds tile bounds");
    return local.translated(double(tile.offset_x), double(tile.offset_y));
}

BoundingBox to_tile_coords(const Tile& tile, const BoundingBox& plan_box) {
    const BoundingBox local =
        plan_box.translated(-double(tile.offset_x), -double(tile.offset_y));
    if (!local.valid() || local.x_min < 0.0 || local.y_min < 0.0 ||
        local.x_max > double(tile.image.width()) || local.y_max > double(tile.image.height()))
        throw OutOfTile("to_tile_coords: box does not lie inside the tile");
    return local;
}

} // namespace pidtwin
