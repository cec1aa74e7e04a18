#pragma once

// Dense double-precision inner loops shared by the learners and LSI.
//
// Every kernel has a portable scalar reference and, where the CPU supports
// it, an AVX2+FMA variant. The variant is picked once per process from CPUID;
// setting ATTACKMAP_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace attackmap::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // (x, y) <- (c*x - s*y, s*x + c*y)
    void (*rotate)(double* x, double* y, double c, double s, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void rotate(double* x, double* y, double c, double s, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define ATTACKMAP_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void rotate(double* x, double* y, double c, double s, std::size_t n);
}  // namespace avx2
#endif

/// True when this binary carries the variant and the running CPU can execute it.
bool isa_supported(Isa isa);
const KernelTable& table_for(Isa isa);

/// The table selected for this process (resolved on first call).
const KernelTable& active();
Isa active_isa();
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    return active().squared_distance(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void rotate(std::span<double> x, std::span<double> y, double c, double s) {
    active().rotate(x.data(), y.data(), c, s, x.size());
}

}  // namespace attackmap::kernels
