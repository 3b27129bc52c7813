#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dora/vec3.hpp"

namespace dora {

struct GrayImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, row 0 on top

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct EdgeMask {
    int width = 0, height = 0;
    std::vector<std::uint8_t> pixels;  // 0 or 1

    EdgeMask() = default;
    EdgeMask(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint8_t v : pixels) n += v != 0;
        return n;
    }
};

// Per-pixel camera-space normals encoded as (n+1)/2 per channel, plus a
// coverage mask. Background pixels hold (0.5, 0.5, 0.5) with coverage 0.
struct NormalMapImage {
    int width = 0, height = 0;
    std::vector<double> rgb;               // 3 channels per pixel, values in [0,1]
    std::vector<std::uint8_t> coverage;    // 1 where a surface was hit

    NormalMapImage() = default;
    NormalMapImage(int w, int h)
        : width(w),
          height(h),
          rgb(static_cast<std::size_t>(w) * h * 3, 0.5),
          coverage(static_cast<std::size_t>(w) * h, 0) {}

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

    void set_pixel(int x, int y, const Vec3& encoded) {
        std::size_t i = index(x, y) * 3;
        rgb[i] = encoded.x;
        rgb[i + 1] = encoded.y;
        rgb[i + 2] = encoded.z;
        coverage[index(x, y)] = 1;
    }

    Vec3 pixel(int x, int y) const {
        std::size_t i = index(x, y) * 3;
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }

    std::size_t coverage_count() const {
        std::size_t n = 0;
        for (std::uint8_t v : coverage) n += v != 0;
        return n;
    }
};

// Rec. 601 luminance of the encoded channels, scaled to 8 bits.
GrayImage to_grayscale(const NormalMapImage& map);

// Minimal deterministic PNG writers (zlib-backed).
void save_png_gray(const GrayImage& image, const std::string& path);
void save_png_rgb(const NormalMapImage& map, const std::string& path);
void save_png_mask(const EdgeMask& mask, const std::string& path);

}  // namespace dora
