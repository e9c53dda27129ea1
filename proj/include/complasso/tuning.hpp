#pragma once

#include <utility>

#include "complasso/cdmm.hpp"

// Scaled-lasso choice of the penalty and noise level.
namespace complasso {

// Ratio gamma / (lambda_hat / sigma_hat) used for the de-bias programs.
inline constexpr double kDebiasRatio = 1.0 / 3.0;

struct TuningResult {
  double lambda0 = 0.0;     // sqrt(2) * Phi^{-1}(1 - k/p) / sqrt(n)
  double k_star = 0.0;      // root of k = L^4(k/p) + 2 L^2(k/p)
  double sigma_hat = 0.0;
  double lambda_hat = 0.0;  // lambda0 * sigma_hat
  double gamma = 0.0;       // kDebiasRatio * lambda_hat / sigma_hat
  int iterations = 0;
  bool converged = false;
  bool sigma_floored = false;
};

// Root in (0, p/2) of k = L^4(k/p) + 2 L^2(k/p), L(t) = Phi^{-1}(1 - t), by
// bisection to 1e-10.
double solve_k(int p);

double universal_lambda0(int n, int p);

// Alternates beta <- lasso(lambda0 * sigma) and sigma <- ||r|| / sqrt(n) until
// sigma moves by less than 1e-6 (at most 100 rounds). settings.lambda is
// ignored. sigma starts at the sample standard deviation of y.
std::pair<FitResult, TuningResult> scaled_lasso(const RegressionProblem& problem, const CdmmSettings& settings);

}  // namespace complasso
