#pragma once

#include <cstddef>

#include "complasso/kernels.hpp"

namespace complasso::kernels {

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define COMPLASSO_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define COMPLASSO_HAVE_NEON_KERNELS 1
namespace neon {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
}  // namespace neon
#endif

}  // namespace complasso::kernels
