#include "colorimetry_detail.hpp"

namespace fairgen::kernels {

namespace detail {

const double* srgb_linear_lut() {
    static const auto table = [] {
        static double lut[256];
        for (int i = 0; i < 256; ++i) {
            const double c = static_cast<double>(i) / 255.0;
            lut[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
        }
        return &lut[0];
    }();
    return table;
}

} // namespace detail

Lab srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return detail::pixel_lab(detail::srgb_linear_lut(), r, g, b);
}

LabAccumulation accumulate_masked_lab_scalar(const std::uint8_t* rgb, std::size_t n_pixels,
                                             const MaskBounds& mask) {
    const double* lut = detail::srgb_linear_lut();
    const double chroma_sq_max = mask.chroma_max * mask.chroma_max;
    LabAccumulation acc;
    acc.total = n_pixels;
    for (std::size_t i = 0; i < n_pixels; ++i) {
        const Lab p = detail::pixel_lab(lut, rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
        if (detail::mask_keep(p, mask.l_min, mask.l_max, chroma_sq_max)) {
            acc.sum_l += p.l;
            acc.sum_a += p.a;
            acc.sum_b += p.b;
            ++acc.kept;
        }
    }
    return acc;
}

} // namespace fairgen::kernels
