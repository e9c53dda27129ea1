#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

#include "kernels/kernels_internal.hpp"

namespace complasso::kernels {
namespace {

constexpr KernelTable kScalarTable{SimdLevel::kScalar, &scalar::dot, &scalar::axpy,
                                   &scalar::sum_squares, &scalar::squared_distance};
#ifdef COMPLASSO_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{SimdLevel::kAvx2, &avx2::dot, &avx2::axpy, &avx2::sum_squares,
                                 &avx2::squared_distance};
#endif
#ifdef COMPLASSO_HAVE_NEON_KERNELS
constexpr KernelTable kNeonTable{SimdLevel::kNeon, &neon::dot, &neon::axpy, &neon::sum_squares,
                                 &neon::squared_distance};
#endif

bool cpu_has_avx2() {
#if defined(COMPLASSO_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best_table() {
  if (const char* env = std::getenv("COMPLASSO_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &kScalarTable;
    if (want == "avx2" && table_for(SimdLevel::kAvx2)) return table_for(SimdLevel::kAvx2);
    if (want == "neon" && table_for(SimdLevel::kNeon)) return table_for(SimdLevel::kNeon);
  }
  if (const KernelTable* t = table_for(SimdLevel::kAvx2)) return t;
  if (const KernelTable* t = table_for(SimdLevel::kNeon)) return t;
  return &kScalarTable;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{best_table()};
  return table;
}

inline const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

}  // namespace

std::string_view level_name(SimdLevel level) {
  switch (level) {
    case SimdLevel::kScalar: return "scalar";
    case SimdLevel::kAvx2: return "avx2";
    case SimdLevel::kNeon: return "neon";
  }
  return "unknown";
}

const KernelTable* table_for(SimdLevel level) {
  switch (level) {
    case SimdLevel::kScalar: return &kScalarTable;
    case SimdLevel::kAvx2:
#ifdef COMPLASSO_HAVE_AVX2_KERNELS
      if (cpu_has_avx2()) return &kAvx2Table;
#endif
      return nullptr;
    case SimdLevel::kNeon:
#ifdef COMPLASSO_HAVE_NEON_KERNELS
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool level_supported(SimdLevel level) { return table_for(level) != nullptr; }

SimdLevel active_level() { return active().level; }

bool set_active_level(SimdLevel level) {
  const KernelTable* t = table_for(level);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return active().dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(a, x.data(), y.data(), x.size());
}

double sum_squares(std::span<const double> x) { return active().sum_squares(x.data(), x.size()); }

double squared_distance(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return active().squared_distance(x.data(), y.data(), x.size());
}

}  // namespace complasso::kernels
