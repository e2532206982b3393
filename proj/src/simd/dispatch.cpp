#include <atomic>
#include <cstdlib>
#include <string_view>

#include "synthmix/error.hpp"
#include "synthmix/simd.hpp"

namespace synthmix::simd {
namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*weighted_dot)(const double*, const double*, const double*, std::size_t);
  double (*sum_squares)(const double*, std::size_t);
  void (*squared_magnitude)(const double*, double, double*, std::size_t);
};

constexpr KernelTable kScalarTable{scalar::dot, scalar::weighted_dot, scalar::sum_squares,
                                   scalar::squared_magnitude};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2Table{avx2::dot, avx2::weighted_dot, avx2::sum_squares,
                                 avx2::squared_magnitude};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeonTable{neon::dot, neon::weighted_dot, neon::sum_squares,
                                 neon::squared_magnitude};
#endif

const KernelTable& table_for(Level level) {
  switch (level) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::kAvx2:
      return kAvx2Table;
#endif
#if defined(__aarch64__)
    case Level::kNeon:
      return kNeonTable;
#endif
    default:
      return kScalarTable;
  }
}

bool supported(Level level) {
  switch (level) {
    case Level::kScalar:
      return true;
    case Level::kAvx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Level::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Level initial_level() {
  if (const char* env = std::getenv("SYNTHMIX_SIMD")) {
    if (std::string_view(env) == "scalar") return Level::kScalar;
  }
  return detected_level();
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{initial_level()};
  return level;
}

const KernelTable& active() { return table_for(current().load(std::memory_order_relaxed)); }

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw ArgumentError("simd kernel: operand lengths differ");
}

}  // namespace

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kScalar:
      return "scalar";
    case Level::kAvx2:
      return "avx2";
    case Level::kNeon:
      return "neon";
  }
  return "unknown";
}

Level detected_level() {
  if (supported(Level::kAvx2)) return Level::kAvx2;
  if (supported(Level::kNeon)) return Level::kNeon;
  return Level::kScalar;
}

Level active_level() { return current().load(std::memory_order_relaxed); }

Level set_level(Level level) {
  const Level installed = supported(level) ? level : Level::kScalar;
  current().store(installed, std::memory_order_relaxed);
  return installed;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  require_same_size(w.size(), a.size());
  require_same_size(a.size(), b.size());
  return active().weighted_dot(w.data(), a.data(), b.data(), a.size());
}

double sum_squares(std::span<const double> a) {
  return active().sum_squares(a.data(), a.size());
}

void squared_magnitude(std::span<const double> interleaved, double scale,
                       std::span<double> out) {
  require_same_size(interleaved.size(), 2 * out.size());
  active().squared_magnitude(interleaved.data(), scale, out.data(), out.size());
}

}  // namespace synthmix::simd
