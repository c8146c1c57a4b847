#include "image_io.hpp"

#include <cstdio>
#include <csetjmp>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "pidtwin/errors.hpp"

namespace pidtwin::detail {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw UnreadableFile("cannot open file: " + path);
    return f;
}

} // namespace

FileKind sniff_file_kind(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    unsigned char magic[8] = {0};
    const size_t n = std::fread(magic, 1, sizeof(magic), f.get());
    if (n >= 8 && png_sig_cmp(magic, 0, 8) == 0) return FileKind::Png;
    if (n >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) return FileKind::Jpeg;
    if (n >= 4 && magic[0] == '%' && magic[1] == 'P' && magic[2] == 'D' && magic[3] == 'F')
        return FileKind::Pdf;
    return FileKind::Unknown;
}

RawImage decode_png(const std::string& path) {
    FilePtr f = open_file(path, "rb");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw UnreadableFile("libpng: out of memory reading " + path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw UnreadableFile("libpng: out of memory reading " + path);
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw UnreadableFile("libpng: failed to decode " + path);
    }

    png_init_io(png, f.get());
    png_read_info(png, info);

    png_uint_32 width = 0, height = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    // Normalize everything to 8-bit gray or RGB.
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const png_size_t rowbytes = png_get_rowbytes(png, info);
    const int channels = png_get_channels(png, info);

    RawImage out;
    out.width = width;
    out.height = height;
    out.channels = uint32_t(channels);
    out.data.resize(size_t(rowbytes) * height);

    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = out.data.data() + size_t(y) * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (out.channels != 1 && out.channels != 3)
        throw UnsupportedFormat("unexpected PNG channel count in " + path);
    return out;
}

namespace {

struct JpegErrorMgr {
    jpeg_error_mgr base;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

} // namespace

RawImage decode_jpeg(const std::string& path) {
    FilePtr f = open_file(path, "rb");

    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;

    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw UnreadableFile("libjpeg: failed to decode " + path);
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f.get());
    jpeg_read_header(&cinfo, TRUE);
    // Request RGB so the gray reduction below is ours, not libjpeg's.
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    RawImage out;
    out.width = cinfo.output_width;
    out.height = cinfo.output_height;
    out.channels = uint32_t(cinfo.output_components);
    out.data.resize(size_t(out.width) * out.height * out.channels);

    const size_t stride = size_t(out.width) * out.channels;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.data.data() + size_t(cinfo.output_scanline) * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);

    if (out.channels != 1 && out.channels != 3)
        throw UnsupportedFormat("unexpected JPEG channel count in " + path);
    return out;
}

void encode_png_gray(const std::string& path, uint32_t width, uint32_t height,
                     const std::vector<uint8_t>& pixels) {
    FilePtr f = open_file(path, "wb");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("libpng: out of memory writing " + path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("libpng: out of memory writing " + path);
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng: failed to write " + path);
    }

    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // Pinned filter + level keep output bytes stable across zlib defaults.
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_compression_level(png, 6);
    png_write_info(png, info);

    std::vector<png_bytep> rows(height);
    for (uint32_t y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(pixels.data() + size_t(y) * width);
    png_write_image(png, rows.data());
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
}

std::vector<uint8_t> encode_png_gray_mem(uint32_t width, uint32_t height,
                                         const std::vector<uint8_t>& pixels) {
    std::vector<uint8_t> out;

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("libpng: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("libpng: out of memory");
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng: in-memory encode failed");
    }

    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t len) {
            auto* buf = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(p));
            buf->insert(buf->end(), data, data + len);
        },
        nullptr);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_compression_level(png, 6);
    png_write_info(png, info);

    std::vector<png_bytep> rows(height);
    for (uint32_t y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(pixels.data() + size_t(y) * width);
    png_write_image(png, rows.data());
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    return out;
}

} // namespace pidtwin::detail
