#pragma once

#include <cstdint>
#include <vector>

#include "fairgen/errors.hpp"

namespace fairgen {

// Interleaved 8-bit RGB, sRGB-encoded.
struct ImageRgb8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // 3 * width * height bytes, row-major

    ImageRgb8() = default;
    ImageRgb8(int w, int h, std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0) : width(w), height(h) {
        if (w <= 0 || h <= 0) raise(Errc::invalid_argument, "image dimensions must be positive");
        pixels.resize(static_cast<std::size_t>(w) * h * 3);
        for (std::size_t i = 0; i < pixels.size(); i += 3) {
            pixels[i] = r;
            pixels[i + 1] = g;
            pixels[i + 2] = b;
        }
    }

    std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        auto* p = at(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

} // namespace fairgen
