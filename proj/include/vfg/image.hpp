// Grayscale float image in [0,1] plus PNG / raw-f32 file I/O.
#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "vfg/common.hpp"

namespace vfg {

struct Image {
    int h = 0;
    int w = 0;
    std::vector<float> px;  // row-major, [0,1]

    Image() = default;
    Image(int h_, int w_, float fill = 0.f)
        : h(h_), w(w_), px(static_cast<std::size_t>(h_) * w_, fill) {}

    float& at(int r, int c) { return px[static_cast<std::size_t>(r) * w + c]; }
    float at(int r, int c) const { return px[static_cast<std::size_t>(r) * w + c]; }
    std::size_t size() const { return px.size(); }
};

inline double mse(const Image& a, const Image& b) {
    check(a.h == b.h && a.w == b.w, "shape-mismatch", "image shapes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.px.size(); ++i) {
        double d = static_cast<double>(a.px[i]) - b.px[i];
        s += d * d;
    }
    return s / static_cast<double>(a.px.size());
}

namespace detail {
struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;
}  // namespace detail

// 8-bit grayscale, value = round(255 * pixel).
inline void write_png_gray8(const std::string& path, const Image& img) {
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    check(fp != nullptr, "io-error", "cannot open for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    check(png && info, "io-error", "libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail("io-error", "png write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.w), static_cast<png_uint_32>(img.h), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<unsigned char> row(static_cast<std::size_t>(img.w));
    for (int r = 0; r < img.h; ++r) {
        for (int c = 0; c < img.w; ++c) {
            float v = img.at(r, c);
            v = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
            row[static_cast<std::size_t>(c)] =
                static_cast<unsigned char>(std::lround(255.0 * v));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline Image read_png_gray8(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    check(fp != nullptr, "io-error", "cannot open for reading: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    check(png && info, "io-error", "libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("io-error", "png read failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int depth = png_get_bit_depth(png, info);
    int color = png_get_color_type(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("io-error", "expected 8-bit grayscale png: " + path);
    }

    Image img(static_cast<int>(h), static_cast<int>(w));
    std::vector<unsigned char> row(w);
    for (png_uint_32 r = 0; r < h; ++r) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 c = 0; c < w; ++c)
            img.at(static_cast<int>(r), static_cast<int>(c)) =
                static_cast<float>(row[c]) / 255.f;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

// Lossless sidecar: row-major little-endian f32, no header.
inline void write_raw_f32(const std::string& path, const Image& img) {
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    check(fp != nullptr, "io-error", "cannot open for writing: " + path);
    std::size_t n = std::fwrite(img.px.data(), sizeof(float), img.px.size(), fp.get());
    check(n == img.px.size(), "io-error", "short write: " + path);
}

inline Image read_raw_f32(const std::string& path, int h, int w) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    check(fp != nullptr, "io-error", "cannot open for reading: " + path);
    Image img(h, w);
    std::size_t n = std::fread(img.px.data(), sizeof(float), img.px.size(), fp.get());
    check(n == img.px.size(), "io-error", "short read: " + path);
    return img;
}

}  // namespace vfg
