// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// 8-bit PNG read/write (gray, RGB, RGBA) on top of libpng.
//
#pragma once

#include "image.hpp"

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>

namespace bodysplat {

inline std::uint8_t
quantize_u8(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

/// Rounds every value to the nearest multiple of 1/255, as a PNG round trip would.
inline Image
quantize_image(const Image &img) {
    Image out = img;
    for (auto &v : out.data) {
        v = quantize_u8(v) / 255.0;
    }
    return out;
}

namespace detail {

struct FileCloser {
    void operator()(std::FILE *f) const {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};

} // namespace detail

inline void
write_png(const std::filesystem::path &path, const Image &img) {
    require(img.channels == 1 || img.channels == 3 || img.channels == 4,
            "write_png: unsupported channel count " + std::to_string(img.channels));
    std::unique_ptr<std::FILE, detail::FileCloser> file(std::fopen(path.c_str(), "wb"));
    require(file != nullptr, "write_png: cannot open " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info  = png != nullptr ? png_create_info_struct(png) : nullptr;
    require(info != nullptr, "write_png: libpng initialisation failed");
    std::vector<png_byte> row(static_cast<std::size_t>(img.width) * img.channels);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ValidationError("write_png: libpng error while writing " + path.string());
    }
    png_init_io(png, file.get());
    const int color_type = img.channels == 1   ? PNG_COLOR_TYPE_GRAY
                           : img.channels == 3 ? PNG_COLOR_TYPE_RGB
                                               : PNG_COLOR_TYPE_RGBA;
    png_set_IHDR(png, info, img.width, img.height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                row[static_cast<std::size_t>(x) * img.channels + c] = quantize_u8(img.at(x, y, c));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

/// Reads an 8-bit PNG; palette and 16-bit inputs are converted, values scaled to [0, 1].
inline Image
read_png(const std::filesystem::path &path) {
    std::unique_ptr<std::FILE, detail::FileCloser> file(std::fopen(path.c_str(), "rb"));
    require(file != nullptr, "read_png: cannot open " + path.string());
    png_byte sig[8] = {};
    require(std::fread(sig, 1, 8, file.get()) == 8 && png_sig_cmp(sig, 0, 8) == 0,
            "read_png: not a PNG file: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info  = png != nullptr ? png_create_info_struct(png) : nullptr;
    require(info != nullptr, "read_png: libpng initialisation failed");
    Image img;
    std::vector<png_byte> row;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ValidationError("read_png: corrupt PNG " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    if (png_get_bit_depth(png, info) == 16) {
        png_set_strip_16(png);
    }
    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
    }
    png_read_update_info(png, info);
    const int width    = static_cast<int>(png_get_image_width(png, info));
    const int height   = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    img                = Image(width, height, channels);
    row.resize(png_get_rowbytes(png, info));
    for (int y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                img.at(x, y, c) = row[static_cast<std::size_t>(x) * channels + c] / 255.0;
            }
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

} // namespace bodysplat
