#include "complasso/tuning.hpp"

#include <cmath>

#include "complasso/normal.hpp"

namespace complasso {
namespace {

constexpr double kSigmaTol = 1e-6;
constexpr int kMaxAlternations = 100;
constexpr double kSigmaFloor = 1e-8;

double fixed_point_gap(double k, double p) {
  const double l = normal_quantile(1.0 - k / p);
  const double l2 = l * l;
  return k - l2 * l2 - 2.0 * l2;
}

}  // namespace

double solve_k(int p) {
  if (p < 2) throw InvalidInput("solve_k requires p >= 2");
  const double pd = static_cast<double>(p);
  double lo = 1e-8;
  double hi = pd / 2.0 - 1e-8;
  double g_lo = fixed_point_gap(lo, pd);
  if (!(g_lo < 0.0 && fixed_point_gap(hi, pd) > 0.0)) {
    throw SolverError("solve_k: root not bracketed");
  }
  while (hi - lo > 1e-10 * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    const double g = fixed_point_gap(mid, pd);
    if ((g < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double universal_lambda0(int n, int p) {
  if (n < 1) throw InvalidInput("n must be positive");
  const double k = solve_k(p);
  return std::sqrt(2.0) * normal_quantile(1.0 - k / static_cast<double>(p)) / std::sqrt(static_cast<double>(n));
}

std::pair<FitResult, TuningResult> scaled_lasso(const RegressionProblem& problem, const CdmmSettings& settings) {
  const Index n = problem.n();
  if (n < 2) throw InvalidInput("scaled lasso requires n >= 2");
  TuningResult tune;
  tune.k_star = solve_k(static_cast<int>(problem.p()));
  tune.lambda0 = universal_lambda0(static_cast<int>(n), static_cast<int>(problem.p()));

  const double nd = static_cast<double>(n);
  double sigma = std::sqrt((problem.y.array() - problem.y.mean()).square().sum() / (nd - 1.0));
  if (!(sigma > kSigmaFloor)) {
    sigma = kSigmaFloor;
    tune.sigma_floored = true;
  }

  CdmmSettings s = settings;
  s.lambda = tune.lambda0 * sigma;
  CdmmSolver solver(problem, s);
  FitResult last;
  for (int it = 1; it <= kMaxAlternations; ++it) {
    solver.set_lambda(tune.lambda0 * sigma);
    solver.reset_multiplier();
    last = solver.run();
    tune.iterations = it;
    double next = std::sqrt(solver.residual().squaredNorm() / nd);
    bool floored = false;
    if (!(next > kSigmaFloor)) {
      next = kSigmaFloor;
      floored = true;
    }
    const double moved = std::fabs(next - sigma);
    sigma = next;
    tune.sigma_floored = floored;
    if (moved < kSigmaTol) {
      tune.converged = true;
      break;
    }
  }
  // The last fit used the previous sigma; refit once so that the reported
  // coefficients, lambda_hat and sigma_hat are mutually consistent.
  solver.set_lambda(tune.lambda0 * sigma);
  solver.reset_multiplier();
  last = solver.run();

  tune.sigma_hat = sigma;
  tune.lambda_hat = tune.lambda0 * sigma;
  tune.gamma = kDebiasRatio * tune.lambda0;
  last.sigma_hat = sigma;
  last.lambda = tune.lambda_hat;
  return {last, tune};
}

}  // namespace complasso
