#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense vector kernels used in the coordinate-descent inner loops.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2/FMA (x86-64) or NEON (aarch64) variant. The variant is
// chosen once at first use from the running CPU; the environment variable
// COMPLASSO_SIMD=scalar|avx2|neon overrides the choice. Variants differ from
// the scalar reference only by floating-point summation order.
namespace complasso::kernels {

enum class SimdLevel { kScalar, kAvx2, kNeon };

std::string_view level_name(SimdLevel level);

// True when `level` was compiled in and the running CPU can execute it.
bool level_supported(SimdLevel level);

SimdLevel active_level();

// Switches the process-wide variant. Returns false (and changes nothing) when
// the level is unsupported. Not meant to be called while kernels are running
// on other threads.
bool set_active_level(SimdLevel level);

// x . y; sizes must match.
double dot(std::span<const double> x, std::span<const double> y);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

// sum_i x_i^2
double sum_squares(std::span<const double> x);

// sum_i (x_i - y_i)^2
double squared_distance(std::span<const double> x, std::span<const double> y);

// Kernel table of one variant. Exposed so tests can compare variants side by
// side without touching the process-wide selection.
struct KernelTable {
  SimdLevel level;
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
};

// nullptr if the level is not supported.
const KernelTable* table_for(SimdLevel level);

}  // namespace complasso::kernels
