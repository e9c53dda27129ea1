#pragma once

#include <vector>

#include "complasso/debias.hpp"
#include "complasso/model.hpp"

namespace complasso {

struct CoefficientInference {
  double estimate = 0.0;  // de-biased estimate
  double std_err = 0.0;   // sigma_hat n^{-1/2} [M~ S M~^T]_ii^{1/2}
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // zero variance; p-value undefined (reported as NaN)
};

struct InferenceResult {
  std::vector<CoefficientInference> coefs;
  double alpha = 0.05;
  double sigma_hat = 0.0;
  Index n = 0;
};

// Two-sided normal intervals and p-values at level 1 - alpha.
InferenceResult confidence_intervals(const DebiasResult& debiased, double sigma_hat, double alpha, Index n);

// Same from raw per-coordinate pieces; used by the pipeline above and by tests.
InferenceResult confidence_intervals(const Vector& estimate, const Vector& cov_diag, double sigma_hat,
                                     double alpha, Index n);

// Indices whose interval excludes zero.
std::vector<Index> select_by_ci(const InferenceResult& inference);

// Least squares on the columns in `support`, subject to each constraint
// group's selected coefficients summing to zero. Extra covariates, when
// present, are always included without constraint. Solved through the KKT
// system; throws SolverError if it is singular.
Coefficients refit_constrained_ols(const RegressionProblem& problem, const std::vector<Index>& support);

struct Prediction {
  Vector fitted;
  double mse = 0.0;
};

// Predictions Z~ beta + X_e gamma on a centered test problem and the mean
// squared error against its response.
Prediction predict(const RegressionProblem& test, const Coefficients& coef);

}  // namespace complasso

#include <functional>

namespace complasso {

struct LoocvResult {
  Vector predictions;  // on the response's original scale
  double mse = 0.0;
  double r_squared = 0.0;  // 1 - SSE / SST
};

// Leave-one-out cross-validation: for each sample, recenters the remaining
// n - 1 rows, fits with `fitter`, and predicts the held-out row on the
// training scale.
LoocvResult loocv(const RegressionProblem& problem,
                  const std::function<Coefficients(const RegressionProblem&)>& fitter);

}  // namespace complasso
