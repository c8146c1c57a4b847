#pragma once

#include <cstdint>
#include <vector>

namespace pidtwin {

/// Foreground/background raster with the same extent as its source PlanImage.
/// Foreground (1) means ink.
class BinaryImage {
public:
    BinaryImage() = default;
    BinaryImage(uint32_t width, uint32_t height, uint8_t fill = 0)
        : width_(width), height_(height), bits_(size_t(width) * height, fill) {}

    uint32_t width() const { return width_; }
    uint32_t height() const { return height_; }

    bool at(uint32_t x, uint32_t y) const { return bits_[size_t(y) * width_ + x] != 0; }
    void set(uint32_t x, uint32_t y, bool v) { bits_[size_t(y) * width_ + x] = v ? 1 : 0; }

    bool in_bounds(int64_t x, int64_t y) const {
        return x >= 0 && y >= 0 && x < int64_t(width_) && y < int64_t(height_);
    }

    size_t foreground_count() const {
        size_t n = 0;
        for (uint8_t b : bits_) n += b;
        return n;
    }

    const std::vector<uint8_t>& bits() const { return bits_; }

    friend bool operator==(const BinaryImage& a, const BinaryImage& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.bits_ == b.bits_;
    }

private:
    uint32_t width_ = 0;
    uint32_t height_ = 0;
    std::vector<uint8_t> bits_;
};

} // namespace pidtwin
