#pragma once

#include <cstdint>
#include <optional>

#include "complasso/model.hpp"

// Desk-scale checks of the design conditions behind the inference guarantees.
// RIP and ROC constants are computed by exhaustive subset enumeration under a
// hard budget; larger requests are refused rather than approximated.
namespace complasso {

inline constexpr std::uint64_t kEnumerationCap = 1000000;

// max_i sum_j |(I - P_C)_ij|
double check_condition1(const ConstraintSet& constraints);

// min_i (I - P_C)_ii; throws InvalidInput when <= 0 (a coefficient is forced
// to zero by the constraints).
double check_condition2(const ConstraintSet& constraints);

// Number of k-subsets of p items, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t p, std::uint64_t k);

struct RipBounds {
  double lower = 0.0;  // min over k-sparse unit alpha of ||A alpha||^2
  double upper = 0.0;  // max over the same
};

// `design` is already scaled (typically Z / sqrt(n)). Throws InvalidInput if
// C(p, k) exceeds kEnumerationCap or k is out of range.
RipBounds rip_constants(const Matrix& design, int k, int threads = 1);

// max over disjoint supports |S1| <= k1, |S2| <= k2 of the largest singular
// value of A_S1^T A_S2. Throws InvalidInput above the enumeration cap.
double roc_constant(const Matrix& design, int k1, int k2, int threads = 1);

// Omega = (I - P)(P_C-free pseudo-inverse) with Sigma Omega = I - P_C when
// null(Sigma) = range(C); built from the range eigenpairs of (I-P)Sigma(I-P).
Matrix population_precision(const Matrix& sigma, const ConstraintSet& constraints);

// Smallest and largest eigenvalue of `sigma` restricted to the complement of
// range(C).
std::pair<double, double> restricted_eigen_bounds(const Matrix& sigma, const ConstraintSet& constraints);

// Heuristic stand-in for the sub-Gaussian norm of Omega^{1/2} z: the largest
// standardized fourth-moment ratio, sqrt of max_j E[x_j^4] / 3 E[x_j^2]^2, of
// the whitened design. Reported only, never used as a threshold.
double kappa_proxy(const Matrix& z_tilde, const Matrix& omega);

struct ConditionReport {
  double k0_observed = 0.0;
  double cond2_min_diag = 0.0;
  std::optional<int> rip_k;
  std::optional<RipBounds> rip;
  std::optional<std::pair<int, int>> roc_k;
  std::optional<double> roc_theta;
  std::optional<std::pair<double, double>> eigen_bounds;
};

}  // namespace complasso
