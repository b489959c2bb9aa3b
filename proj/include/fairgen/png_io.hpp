#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fairgen/image.hpp"

namespace fairgen {

// 8-bit RGB PNG with an sRGB chunk; encoding is deterministic for identical
// pixel data.
std::vector<std::uint8_t> encode_png(const ImageRgb8& image);
ImageRgb8 decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const ImageRgb8& image);
ImageRgb8 read_png(const std::filesystem::path& path);

} // namespace fairgen
