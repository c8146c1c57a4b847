#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pidtwin/geometry.hpp"

namespace pidtwin {

/// 8-bit grayscale raster of a whole plan or a cutout.
class PlanImage {
public:
    PlanImage() = default;
    PlanImage(uint32_t width, uint32_t height, std::vector<uint8_t> pixels,
              std::string source_id = {});

    /// Uniform image of the given intensity.
    static PlanImage filled(uint32_t width, uint32_t height, uint8_t intensity,
                            std::string source_id = {});

    uint32_t width() const { return width_; }
    uint32_t height() const { return height_; }
    const std::string& source_id() const { return source_id_; }
    const std::vector<uint8_t>& pixels() const { return pixels_; }

    uint8_t at(uint32_t x, uint32_t y) const { return pixels_[size_t(y) * width_ + x]; }
    void set(uint32_t x, uint32_t y, uint8_t v) { pixels_[size_t(y) * width_ + x] = v; }

    bool in_bounds(double x, double y) const {
        return x >= 0.0 && y >= 0.0 && x < double(width_) && y < double(height_);
    }

    BoundingBox extent() const { return {0.0, 0.0, double(width_), double(height_)}; }

private:
    uint32_t width_ = 0;
    uint32_t height_ = 0;
    std::vector<uint8_t> pixels_;
    std::string source_id_;
};

/// One cutout of a plan plus the offset that maps it back to whole-plan coordinates.
struct Tile {
    PlanImage image;
    uint32_t offset_x = 0;
    uint32_t offset_y = 0;
    uint32_t row = 0;
    uint32_t col = 0;
};

/// BT.601 luminance, rounded to the nearest integer.
uint8_t luminance(uint8_t r, uint8_t g, uint8_t b);

/// Loads a PNG or JPEG file as 8-bit grayscale. Color input is reduced with
/// BT.601 luminance weights (round(0.299 R + 0.587 G + 0.114 B)). PDF input is
/// rejected with a hint to pre-rasterize. The source id is the file stem.
/// Throws UnreadableFile, UnsupportedFormat.
PlanImage load_plan(const std::string& path, std::optional<int> dpi_hint = std::nullopt);

/// Writes an 8-bit grayscale PNG. Output bytes are deterministic for a given image.
void save_png(const PlanImage& image, const std::string& path);

/// Splits a plan into a dense grid of overlapping tiles. Stride is
/// tile_size - overlap; the last row/column is clamped to the plan edge so every
/// pixel is covered at least once. Throws InvalidTiling when tile_size <= 2*overlap
/// or the plan is empty.
std::vector<Tile> decompose(const PlanImage& plan, uint32_t tile_size, uint32_t overlap);

/// Translates a tile-local box into whole-plan coordinates.
/// Throws OutOfTile when the box exceeds the tile extent.
BoundingBox to_plan_coords(const Tile& tile, const BoundingBox& local);

/// Inverse of to_plan_coords. Throws OutOfTile when the box does not lie inside the tile.
BoundingBox to_tile_coords(const Tile& tile, const BoundingBox& plan_box);

} // namespace pidtwin
