#include "fairgen/png_io.hpp"

#include <csetjmp>
#include <cstring>
#include <fstream>

#include <png.h>

namespace fairgen {

namespace {

struct WriteSink {
    std::vector<std::uint8_t>* out;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
    auto* sink = static_cast<WriteSink*>(png_get_io_ptr(png));
    sink->out->insert(sink->out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

struct ReadSource {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t offset;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t len) {
    auto* src = static_cast<ReadSource*>(png_get_io_ptr(png));
    if (src->offset + len > src->size) png_error(png, "truncated PNG stream");
    std::memcpy(out, src->data + src->offset, len);
    src->offset += len;
}

} // namespace

std::vector<std::uint8_t> encode_png(const ImageRgb8& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3)
        raise(Errc::invalid_argument, "malformed image buffer");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(Errc::io, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        raise(Errc::io, "png_create_info_struct failed");
    }

    std::vector<std::uint8_t> out;
    WriteSink sink{&out};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(Errc::io, "PNG encode failed");
    }
    png_set_write_fn(png, &sink, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB_gAMA_and_cHRM(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y)
        png_write_row(png, const_cast<png_bytep>(image.at(0, y)));
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    return out;
}

ImageRgb8 decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        raise(Errc::io, "not a PNG stream");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(Errc::io, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        raise(Errc::io, "png_create_info_struct failed");
    }

    ImageRgb8 image;
    ReadSource src{bytes.data(), bytes.size(), 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::io, "PNG decode failed");
    }
    png_set_read_fn(png, &src, png_read_from_span);
    png_read_info(png, info);

    png_set_expand(png);      // palette/gray/low-depth -> 8-bit RGB(A)
    png_set_strip_16(png);    // 16-bit -> 8-bit
    png_set_strip_alpha(png); // drop alpha
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    image.width = static_cast<int>(png_get_image_width(png, info));
    image.height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::io, "unexpected channel count after PNG transforms");
    }
    image.pixels.resize(static_cast<std::size_t>(image.width) * image.height * 3);
    for (int y = 0; y < image.height; ++y)
        png_read_row(png, image.at(0, y), nullptr);
    png_read_end(png, info);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

void write_png(const std::filesystem::path& path, const ImageRgb8& image) {
    auto bytes = encode_png(image);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(Errc::io, "short write to " + path.string());
}

ImageRgb8 read_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

} // namespace fairgen
