#include "colorimetry_detail.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace fairgen::kernels {

namespace detail {
bool avx2_compiled() { return true; }
}

namespace {

using namespace detail;

inline __m256d lab_f_vec(__m256d t) {
    const __m256d third = _mm256_set1_pd(kThird);
    // cbrt branch: same seed and Newton sequence as detail::cbrt_pos.
    __m256d q = _mm256_sqrt_pd(_mm256_sqrt_pd(t));
    __m256d y = _mm256_mul_pd(q, _mm256_sqrt_pd(q));
    for (int i = 0; i < 5; ++i) {
        __m256d ysq = _mm256_mul_pd(y, y);
        __m256d corr = _mm256_mul_pd(_mm256_sub_pd(y, _mm256_div_pd(t, ysq)), third);
        y = _mm256_sub_pd(y, corr);
    }
    // linear branch for t <= eps; lanes not selected may hold NaN from 0/0
    // in the cbrt branch and are discarded by the blend.
    __m256d lin = _mm256_div_pd(
        _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(kLabKappa), t), _mm256_set1_pd(16.0)),
        _mm256_set1_pd(116.0));
    __m256d gt = _mm256_cmp_pd(t, _mm256_set1_pd(kLabEps), _CMP_GT_OQ);
    return _mm256_blendv_pd(lin, y, gt);
}

inline double reduce_lanes(__m256d v) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return ((lane[0] + lane[1]) + lane[2]) + lane[3];
}

} // namespace

LabAccumulation accumulate_masked_lab_avx2(const std::uint8_t* rgb, std::size_t n_pixels,
                                           const MaskBounds& mask) {
    const double* lut = detail::srgb_linear_lut();
    const double chroma_sq_max = mask.chroma_max * mask.chroma_max;

    LabAccumulation acc;
    acc.total = n_pixels;

    __m256d sum_l = _mm256_setzero_pd();
    __m256d sum_a = _mm256_setzero_pd();
    __m256d sum_b = _mm256_setzero_pd();
    std::uint64_t kept = 0;

    const __m256d l_min = _mm256_set1_pd(mask.l_min);
    const __m256d l_max = _mm256_set1_pd(mask.l_max);
    const __m256d csq_max = _mm256_set1_pd(chroma_sq_max);

    // Byte shuffles picking the R/G/B bytes of four interleaved pixels out of
    // one 16-byte load, widened to int32 lanes.
    const __m128i pick_r = _mm_setr_epi8(0, -1, -1, -1, 3, -1, -1, -1, 6, -1, -1, -1, 9, -1, -1, -1);
    const __m128i pick_g = _mm_setr_epi8(1, -1, -1, -1, 4, -1, -1, -1, 7, -1, -1, -1, 10, -1, -1, -1);
    const __m128i pick_b = _mm_setr_epi8(2, -1, -1, -1, 5, -1, -1, -1, 8, -1, -1, -1, 11, -1, -1, -1);

    std::size_t i = 0;
    // The 16-byte load reaches 4 bytes past the 12-byte pixel group, so stop
    // early enough to stay inside the buffer; the scalar tail covers the rest.
    while (i + 6 <= n_pixels) {
        const __m128i raw = _mm_loadu_si128(reinterpret_cast<const __m128i*>(rgb + 3 * i));
        const __m128i ri = _mm_shuffle_epi8(raw, pick_r);
        const __m128i gi = _mm_shuffle_epi8(raw, pick_g);
        const __m128i bi = _mm_shuffle_epi8(raw, pick_b);

        const __m256d rl = _mm256_i32gather_pd(lut, ri, 8);
        const __m256d gl = _mm256_i32gather_pd(lut, gi, 8);
        const __m256d bl = _mm256_i32gather_pd(lut, bi, 8);

        const __m256d x = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(rl, _mm256_set1_pd(kM00)), _mm256_mul_pd(gl, _mm256_set1_pd(kM01))),
            _mm256_mul_pd(bl, _mm256_set1_pd(kM02)));
        const __m256d y = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(rl, _mm256_set1_pd(kM10)), _mm256_mul_pd(gl, _mm256_set1_pd(kM11))),
            _mm256_mul_pd(bl, _mm256_set1_pd(kM12)));
        const __m256d z = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(rl, _mm256_set1_pd(kM20)), _mm256_mul_pd(gl, _mm256_set1_pd(kM21))),
            _mm256_mul_pd(bl, _mm256_set1_pd(kM22)));

        const __m256d fx = lab_f_vec(_mm256_div_pd(x, _mm256_set1_pd(kXn)));
        const __m256d fy = lab_f_vec(_mm256_div_pd(y, _mm256_set1_pd(kYn)));
        const __m256d fz = lab_f_vec(_mm256_div_pd(z, _mm256_set1_pd(kZn)));

        const __m256d L = _mm256_sub_pd(_mm256_mul_pd(_mm256_set1_pd(116.0), fy), _mm256_set1_pd(16.0));
        const __m256d A = _mm256_mul_pd(_mm256_set1_pd(500.0), _mm256_sub_pd(fx, fy));
        const __m256d B = _mm256_mul_pd(_mm256_set1_pd(200.0), _mm256_sub_pd(fy, fz));

        const __m256d csq = _mm256_add_pd(_mm256_mul_pd(A, A), _mm256_mul_pd(B, B));
        __m256d keep = _mm256_and_pd(_mm256_cmp_pd(L, l_min, _CMP_GE_OQ), _mm256_cmp_pd(L, l_max, _CMP_LE_OQ));
        keep = _mm256_and_pd(keep, _mm256_cmp_pd(csq, csq_max, _CMP_LE_OQ));

        sum_l = _mm256_add_pd(sum_l, _mm256_and_pd(keep, L));
        sum_a = _mm256_add_pd(sum_a, _mm256_and_pd(keep, A));
        sum_b = _mm256_add_pd(sum_b, _mm256_and_pd(keep, B));
        kept += static_cast<unsigned>(__builtin_popcount(_mm256_movemask_pd(keep)));

        i += 4;
    }

    acc.sum_l = reduce_lanes(sum_l);
    acc.sum_a = reduce_lanes(sum_a);
    acc.sum_b = reduce_lanes(sum_b);
    acc.kept = kept;

    for (; i < n_pixels; ++i) {
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

#else // !__AVX2__

namespace fairgen::kernels {

namespace detail {
bool avx2_compiled() { return false; }
}

LabAccumulation accumulate_masked_lab_avx2(const std::uint8_t* rgb, std::size_t n_pixels,
                                           const MaskBounds& mask) {
    // Not compiled for this target; dispatch never routes here because
    // avx2_available() is false.
    return accumulate_masked_lab_scalar(rgb, n_pixels, mask);
}

} // namespace fairgen::kernels

#endif
