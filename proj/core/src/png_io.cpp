// Copyright (c) 2026 the probefuse authors.
// SPDX-License-Identifier: Apache-2.0

#include "probefuse/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace probefuse {

namespace {

[[noreturn]] void fail(const std::string &path, const std::string &what) {
    throw InputError("png '" + path + "': " + what);
}

struct FileCloser {
    void operator()(FILE *f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void check_range(const std::string &path, const std::vector<double> &data) {
    for (double v : data)
        if (!(v >= 0.0 && v <= 1.0))
            fail(path, "pixel values must be in [0,1]");
}

void write_gray_or_rgb(const std::string &path, int width, int height,
                       int channels, int bit_depth,
                       const std::vector<double> &data) {
    if (bit_depth != 8 && bit_depth != 16)
        fail(path, "bit depth must be 8 or 16");
    check_range(path, data);

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) fail(path, "cannot open for writing");

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "libpng error while writing");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, bit_depth,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
    const size_t row_values = static_cast<size_t>(width) * channels;
    if (bit_depth == 8) {
        std::vector<png_byte> row(row_values);
        for (int y = 0; y < height; ++y) {
            for (size_t i = 0; i < row_values; ++i)
                row[i] = static_cast<png_byte>(
                    std::lround(data[y * row_values + i] * maxval));
            png_write_row(png, row.data());
        }
    } else {
        // stored big-endian as PNG requires
        std::vector<png_byte> bytes(row_values * 2);
        for (int y = 0; y < height; ++y) {
            for (size_t i = 0; i < row_values; ++i) {
                const png_uint_16 q = static_cast<png_uint_16>(
                    std::lround(data[y * row_values + i] * maxval));
                bytes[2 * i] = static_cast<png_byte>(q >> 8);
                bytes[2 * i + 1] = static_cast<png_byte>(q & 0xff);
            }
            png_write_row(png, bytes.data());
        }
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png(const std::string &path, const Image3 &img, int bit_depth) {
    if (img.width < 1 || img.height < 1) fail(path, "empty image");
    write_gray_or_rgb(path, img.width, img.height, 3, bit_depth, img.data);
}

void write_png_gray(const std::string &path, const Image1 &img,
                    int bit_depth) {
    if (img.width < 1 || img.height < 1) fail(path, "empty image");
    write_gray_or_rgb(path, img.width, img.height, 1, bit_depth, img.data);
}

Image3 read_png(const std::string &path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(path, "cannot open");

    png_byte signature[8];
    if (std::fread(signature, 1, 8, fp.get()) != 8 ||
        png_sig_cmp(signature, 0, 8))
        fail(path, "not a png file");

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "libpng error while reading");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int width = png_get_image_width(png, info);
    const int height = png_get_image_height(png, info);

    // normalize to 8/16-bit RGB
    png_set_expand(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
    const size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<png_byte> row(row_bytes);
    Image3 img(width, height);
    for (int y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c) {
                double v;
                if (bit_depth == 16) {
                    const size_t i = (static_cast<size_t>(x) * 3 + c) * 2;
                    v = ((row[i] << 8) | row[i + 1]) / maxval;
                } else {
                    v = row[static_cast<size_t>(x) * 3 + c] / maxval;
                }
                img.at(x, y, c) = v;
            }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

}  // namespace probefuse
