#pragma once

#include <cstddef>
#include <cstdint>

namespace fairgen::kernels {

struct Lab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// Skin-pixel mask: drop very dark / very bright / high-chroma pixels
// (hair, pupils, background) before aggregating.
struct MaskBounds {
    double l_min = 10.0;
    double l_max = 95.0;
    double chroma_max = 60.0;
};

struct LabAccumulation {
    double sum_l = 0.0;
    double sum_a = 0.0;
    double sum_b = 0.0;
    std::uint64_t kept = 0;  // pixels passing the mask
    std::uint64_t total = 0; // pixels seen
};

// Single-pixel reference conversion: 8-bit sRGB -> linear (IEC 61966-2-1)
// -> XYZ (D65) -> CIELAB. Double precision throughout.
Lab srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Per-pixel Lab + mask + sum over an interleaved RGB8 buffer.
// Scalar kernel is the reference; the AVX2 variant computes bit-identical
// per-pixel values and mask decisions (same table, same operation order,
// correctly-rounded sqrt/div, no FMA contraction) and may differ from the
// scalar sums only by floating-point summation order.
LabAccumulation accumulate_masked_lab_scalar(const std::uint8_t* rgb, std::size_t n_pixels,
                                             const MaskBounds& mask);
LabAccumulation accumulate_masked_lab_avx2(const std::uint8_t* rgb, std::size_t n_pixels,
                                           const MaskBounds& mask);

bool avx2_available();

enum class Kernel { auto_detect, scalar, avx2 };

// Process-wide kernel selection. auto_detect picks AVX2 when the CPU has it
// (overridable with FAIRGEN_KERNEL=scalar|avx2 in the environment).
void set_kernel(Kernel k);
Kernel active_kernel();
const char* kernel_name(Kernel k);

// Dispatched entry point used by the audit path.
LabAccumulation accumulate_masked_lab(const std::uint8_t* rgb, std::size_t n_pixels,
                                      const MaskBounds& mask = {});

} // namespace fairgen::kernels
