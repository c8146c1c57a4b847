#pragma once

// Internal raster codec layer (libpng / libjpeg). Not installed.

#include <cstdint>
#include <string>
#include <vector>

namespace pidtwin::detail {

struct RawImage {
    uint32_t width = 0;
    uint32_t height = 0;
    uint32_t channels = 0; // 1 = gray, 3 = RGB
    std::vector<uint8_t> data; // row-major, interleaved
};

enum class FileKind { Png, Jpeg, Pdf, Unknown };

FileKind sniff_file_kind(const std::string& path);

RawImage decode_png(const std::string& path);
RawImage decode_jpeg(const std::string& path);

void encode_png_gray(const std::string& path, uint32_t width, uint32_t height,
                     const std::vector<uint8_t>& pixels);

/// Same bytes as encode_png_gray, buffered in memory.
std::vector<uint8_t> encode_png_gray_mem(uint32_t width, uint32_t height,
                                         const std::vector<uint8_t>& pixels);

} // namespace pidtwin::detail
