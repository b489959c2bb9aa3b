#pragma once

// Shared per-pixel math for the colorimetry kernels. Both the scalar and the
// AVX2 translation units are compiled with -ffp-contract=off so the exact
// same sequence of IEEE operations runs in both; per-pixel results must be
// bit-identical between variants.

#include <cmath>
#include <cstdint>

#include "fairgen/kernels/colorimetry.hpp"

namespace fairgen::kernels::detail {

// sRGB -> XYZ (D65) row-major matrix, IEC 61966-2-1 / sRGB primaries.
inline constexpr double kM00 = 0.4124564, kM01 = 0.3575761, kM02 = 0.1804375;
inline constexpr double kM10 = 0.2126729, kM11 = 0.7151522, kM12 = 0.0721750;
inline constexpr double kM20 = 0.0193339, kM21 = 0.1191920, kM22 = 0.9503041;

// Reference white taken as the matrix applied to RGB(1,1,1), evaluated in
// the same association order as the pixel path, so the white point maps to
// L=100, a=b=0 exactly.
inline constexpr double kXn = (kM00 + kM01) + kM02;
inline constexpr double kYn = (kM10 + kM11) + kM12;
inline constexpr double kZn = (kM20 + kM21) + kM22;

inline constexpr double kLabEps = 216.0 / 24389.0;   // (6/29)^3
inline constexpr double kLabKappa = 24389.0 / 27.0;  // (29/3)^3
inline constexpr double kThird = 1.0 / 3.0;

// 256-entry linearization table for 8-bit sRGB, defined in the scalar TU.
extern const double* srgb_linear_lut();

// cbrt on (0, 1]: x^(3/8) seed from three square roots, then five Newton
// steps; converges to machine epsilon over [kLabEps, 1]. sqrt and div are
// correctly rounded, so scalar and vector evaluations agree bit for bit.
inline double cbrt_pos(double x) {
    double q = std::sqrt(std::sqrt(x));
    double y = q * std::sqrt(q);
    for (int i = 0; i < 5; ++i) y = y - (y - x / (y * y)) * kThird;
    return y;
}

inline double lab_f(double t) {
    return t > kLabEps ? cbrt_pos(t) : (kLabKappa * t + 16.0) / 116.0;
}

inline Lab pixel_lab(const double* lut, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double rl = lut[r];
    const double gl = lut[g];
    const double bl = lut[b];
    const double x = rl * kM00 + gl * kM01 + bl * kM02;
    const double y = rl * kM10 + gl * kM11 + bl * kM12;
    const double z = rl * kM20 + gl * kM21 + bl * kM22;
    const double fx = lab_f(x / kXn);
    const double fy = lab_f(y / kYn);
    const double fz = lab_f(z / kZn);
    return Lab{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline bool mask_keep(const Lab& p, double l_min, double l_max, double chroma_sq_max) {
    const double chroma_sq = p.a * p.a + p.b * p.b;
    return p.l >= l_min && p.l <= l_max && chroma_sq <= chroma_sq_max;
}

} // namespace fairgen::kernels::detail
