#pragma once
// Data-parallel inner kernels used by the kernel-matrix, prediction and
// spectrum code. Each kernel has a scalar reference implementation and
// vectorized variants (AVX2+FMA on x86-64, NEON on AArch64); the variant is
// picked once at startup from the running CPU.

#include <cstddef>
#include <span>
#include <string_view>

namespace synthmix::simd {

enum class Level { kScalar, kAvx2, kNeon };

std::string_view level_name(Level level);

/// Best level supported by this CPU and build.
Level detected_level();

/// Level currently used by the dispatching entry points. Defaults to
/// detected_level(); the environment variable SYNTHMIX_SIMD=scalar forces the
/// reference kernels.
Level active_level();

/// Overrides the dispatch level. Requesting a level the CPU cannot run falls
/// back to scalar. Returns the level actually installed.
Level set_level(Level level);

/// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

/// sum_i w[i] * a[i] * b[i]
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);

/// sum_i a[i]^2
double sum_squares(std::span<const double> a);

/// out[i] = scale * (z[2i]^2 + z[2i+1]^2) for interleaved complex z.
void squared_magnitude(std::span<const double> interleaved, double scale,
                       std::span<double> out);

// Direct access to each implementation, for equivalence testing.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double weighted_dot(const double* w, const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);
void squared_magnitude(const double* z, double scale, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double weighted_dot(const double* w, const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);
void squared_magnitude(const double* z, double scale, double* out, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double weighted_dot(const double* w, const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);
void squared_magnitude(const double* z, double scale, double* out, std::size_t n);
}  // namespace neon
#endif

}  // namespace synthmix::simd
