#include "attackmap/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace attackmap::kernels {

namespace {

constexpr KernelTable kScalar{scalar::dot, scalar::squared_distance, scalar::axpy, scalar::rotate};

#if defined(ATTACKMAP_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2{avx2::dot, avx2::squared_distance, avx2::axpy, avx2::rotate};
#endif

Isa resolve() {
    if (const char* forced = std::getenv("ATTACKMAP_SIMD")) {
        if (std::string_view(forced) == "scalar") return Isa::scalar;
    }
    return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

}  // namespace

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(ATTACKMAP_HAVE_AVX2_KERNELS)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table_for(Isa isa) {
#if defined(ATTACKMAP_HAVE_AVX2_KERNELS)
    if (isa == Isa::avx2) return kAvx2;
#endif
    (void)isa;
    return kScalar;
}

Isa active_isa() {
    static const Isa isa = resolve();
    return isa;
}

const KernelTable& active() {
    static const KernelTable& table = table_for(active_isa());
    return table;
}

std::string_view isa_name(Isa isa) {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

}  // namespace attackmap::kernels
