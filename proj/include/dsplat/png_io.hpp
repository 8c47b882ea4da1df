#pragma once

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <vector>

#include "dsplat/image.hpp"
#include "dsplat/io_util.hpp"

namespace dsplat {

// Lossless 8-bit PNG. RGB images quantize with at most 1/255 per-channel
// error; binary masks (written as 0/255 gray) round-trip bit-exactly.

namespace detail {

struct PngWriteSink {
    std::string bytes;
};

inline void png_sink_write(png_structp png, png_bytep data, png_size_t len) {
    auto* sink = static_cast<PngWriteSink*>(png_get_io_ptr(png));
    sink->bytes.append(reinterpret_cast<char*>(data), len);
}

struct PngReadSource {
    const std::string* bytes;
    size_t offset = 0;
};

inline void png_source_read(png_structp png, png_bytep out, png_size_t len) {
    auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
    if (src->offset + len > src->bytes->size()) png_error(png, "unexpected end of stream");
    std::memcpy(out, src->bytes->data() + src->offset, len);
    src->offset += len;
}

} // namespace detail

inline void write_image(const std::string& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw Error(ErrorCode::InvalidArgument, "png supports 1 or 3 channels");
    if (img.width <= 0 || img.height <= 0)
        throw Error(ErrorCode::InvalidArgument, "empty image");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error(ErrorCode::IoError, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorCode::IoError, "png_create_info_struct failed");
    }

    detail::PngWriteSink sink;
    std::vector<unsigned char> row(static_cast<size_t>(img.width) *
                                   static_cast<size_t>(img.channels));

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::IoError, "png encode failed for " + path);
    }

    png_set_write_fn(png, &sink, detail::png_sink_write, nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double v = clamp(img.at(x, y, c), 0.0, 1.0);
                row[static_cast<size_t>(x * img.channels + c)] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);

    write_file_atomic(path, sink.bytes);
}

inline Image read_image(const std::string& path) {
    std::string bytes = read_file(path);
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8))
        throw Error(ErrorCode::MalformedFile, "not a png: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error(ErrorCode::IoError, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorCode::IoError, "png_create_info_struct failed");
    }

    detail::PngReadSource src{&bytes, 0};
    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> data;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::MalformedFile, "corrupt png: " + path);
    }

    png_set_read_fn(png, &src, detail::png_source_read);
    png_read_info(png, info);

    png_uint_32 width = png_get_image_width(png, info);
    png_uint_32 height = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    // Normalize everything to 8-bit gray or RGB.
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    int channels = static_cast<int>(png_get_channels(png, info));
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::MalformedFile, "unsupported png layout: " + path);
    }

    size_t stride = static_cast<size_t>(width) * static_cast<size_t>(channels);
    data.resize(stride * height);
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = data.data() + y * stride;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(static_cast<int>(width), static_cast<int>(height), channels);
    for (size_t i = 0; i < data.size(); ++i)
        img.pixels[i] = static_cast<double>(data[i]) / 255.0;
    return img;
}

} // namespace dsplat
