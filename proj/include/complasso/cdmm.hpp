#pragma once

#include "complasso/model.hpp"
#include "complasso/types.hpp"

// Coordinate descent method of multipliers for
//
//   minimize (1/2n) ||y - Z~ beta - X_e gamma||^2 + lambda ||beta||_1
//   subject to C^T beta = 0.
//
// The augmented Lagrangian is minimized by cyclic coordinate sweeps at a fixed
// scaled multiplier xi, then xi <- xi + C^T beta, until both the coordinates
// and the constraint residual settle.
namespace complasso {

struct CdmmSettings {
  double mu = 1.0;
  double lambda = 0.0;
  double tol_beta = 1e-7;
  double tol_constraint = 1e-8;
  int max_outer = 500;
  int max_inner = 10000;

  void validate() const;
};

struct FitResult {
  Coefficients coef;
  double lambda = 0.0;
  double sigma_hat = 0.0;      // filled by the tuning module
  int n_sweeps = 0;            // total coordinate sweeps
  int n_outer = 0;             // multiplier updates
  double constraint_violation = 0.0;
  double objective = 0.0;
  Vector multiplier;           // eta = mu * xi at exit, length r
  bool converged = false;
};

double soft_threshold(double t, double lambda);

class CdmmSolver {
 public:
  // Throws InvalidInput for non-finite data or a column with ||z~_j|| = 0 and
  // ||C_j|| = 0 (the coordinate has no curvature).
  CdmmSolver(const RegressionProblem& problem, const CdmmSettings& settings);

  void set_lambda(double lambda);
  void warm_start(const Coefficients& start);
  void reset_multiplier();

  // Exact minimization of the augmented Lagrangian over beta_j; returns the
  // absolute change.
  double update_coordinate(Index j);
  // One cyclic pass over beta_1..beta_p then the extra covariates; returns the
  // largest absolute change.
  double sweep();
  // xi <- xi + C^T beta
  void update_multiplier();

  double objective() const;
  double augmented_lagrangian() const;

  FitResult run();

  const Vector& beta() const { return beta_; }
  const Vector& gamma() const { return gamma_; }
  const Vector& residual() const { return resid_; }
  const Vector& xi() const { return xi_; }

 private:
  void recompute_state();

  const RegressionProblem& prob_;
  CdmmSettings settings_;
  double inv_n_;
  Matrix ct_;  // C^T, r x p; column j is the constraint row C_j
  Vector col_sq_;     // ||z~_j||^2 / n
  Vector c_row_sq_;   // ||C_j||^2
  Vector extra_sq_;   // ||x_k||^2
  Vector beta_, gamma_, resid_, ct_beta_, xi_;
};

FitResult fit(const RegressionProblem& problem, const CdmmSettings& settings,
              const Coefficients* warm = nullptr);

// Max over coordinates of the violation of the subgradient optimality
// condition |(1/n) z~_j^T r - (C eta)_j| <= lambda (with sign agreement on the
// active set); zero at an exact solution.
double kkt_violation(const RegressionProblem& problem, const FitResult& fit);

}  // namespace complasso
