#include "fairgen/kernels/colorimetry.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "fairgen/errors.hpp"

namespace fairgen::kernels {

namespace detail {
bool avx2_compiled(); // defined in the AVX2 translation unit
}

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
    return detail::avx2_compiled() && __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

std::atomic<Kernel> g_selected{Kernel::auto_detect};

Kernel resolve_auto() {
    if (const char* env = std::getenv("FAIRGEN_KERNEL")) {
        if (std::strcmp(env, "scalar") == 0) return Kernel::scalar;
        if (std::strcmp(env, "avx2") == 0) return Kernel::avx2;
    }
    return avx2_available() ? Kernel::avx2 : Kernel::scalar;
}

} // namespace

void set_kernel(Kernel k) {
    if (k == Kernel::avx2 && !avx2_available())
        raise(Errc::config, "AVX2 kernel requested but not available on this CPU/build");
    g_selected.store(k);
}

Kernel active_kernel() {
    Kernel k = g_selected.load();
    return k == Kernel::auto_detect ? resolve_auto() : k;
}

const char* kernel_name(Kernel k) {
    switch (k) {
    case Kernel::auto_detect: return "auto";
    case Kernel::scalar: return "scalar";
    case Kernel::avx2: return "avx2";
    }
    return "auto";
}

LabAccumulation accumulate_masked_lab(const std::uint8_t* rgb, std::size_t n_pixels,
                                      const MaskBounds& mask) {
    if (active_kernel() == Kernel::avx2 && avx2_available())
        return accumulate_masked_lab_avx2(rgb, n_pixels, mask);
    return accumulate_masked_lab_scalar(rgb, n_pixels, mask);
}

} // namespace fairgen::kernels
