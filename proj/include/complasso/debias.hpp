#pragma once

#include <vector>

#include "complasso/cdmm.hpp"
#include "complasso/model.hpp"

// De-biasing of the constrained lasso. For each coordinate i a row m_i of M
// solves
//
//   minimize m^T S m   subject to   ||S m - (I - P_C) e_i||_inf <= gamma,
//
// with S the empirical covariance of the projected design. M is then projected
// on both sides, M~ = (I - P_C) M (I - P_C), and
//
//   beta_u = beta_n + (1/n) M~ Z~^T (y - Z~ beta_n).
namespace complasso {

enum class QpMethod {
  // Coordinate descent on the equivalent penalized form
  // min 1/2 m^T S m - b^T m + gamma ||m||_1 (same minimizers).
  kCoordinateDescent,
  // Operator splitting over (m, z): exact m-step through one cached
  // eigendecomposition of S, z projected on the l_inf ball around b.
  kAdmm,
};

struct QpSettings {
  double gamma = 0.0;
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  int max_iter = 50000;
  double rho = 1.0;
  QpMethod method = QpMethod::kCoordinateDescent;
  double escalation_factor = 1.5;
  int max_escalations = 5;
  int threads = 1;

  void validate() const;
};

enum class RowStatus { kSolved, kInfeasible, kMaxIter };

const char* to_string(RowStatus status);

struct RowQpResult {
  Vector m;
  RowStatus status = RowStatus::kMaxIter;
  int iterations = 0;
  double objective = 0.0;  // m^T S m
  double violation = 0.0;  // max(||S m - b||_inf - gamma, 0)
};

// Solves row programs against one covariance matrix. The eigendecomposition is
// computed once and shared by every row; the object is read-only afterwards
// and safe to use from several threads.
class RowProgramSolver {
 public:
  explicit RowProgramSolver(Matrix sigma);

  RowQpResult solve(const Vector& b, const QpSettings& settings) const;

  const Matrix& sigma() const { return sigma_; }
  Index rank() const { return rank_; }

  // True when d, projected on the null space of S, proves the program
  // infeasible: b^T d > gamma ||d||_1 while S d = 0.
  bool certifies_infeasible(const Vector& direction, const Vector& b, double gamma) const;

 private:
  RowQpResult solve_cd(const Vector& b, const QpSettings& settings) const;
  RowQpResult solve_admm(const Vector& b, const QpSettings& settings) const;
  void finish(RowQpResult& res, const Vector& b, double gamma, double tol) const;

  Matrix sigma_;
  Matrix range_vectors_;  // eigenvectors with nonnegligible eigenvalues
  Vector range_values_;
  Matrix null_vectors_;
  Index rank_ = 0;
};

RowQpResult solve_row_qp(const Matrix& sigma, const Vector& b, const QpSettings& settings);

// Z~^T Z~ / n of the design after the unpenalized covariates (if any) have
// been partialled out.
Matrix empirical_cov(const RegressionProblem& problem);

struct DebiasResult {
  Matrix m;             // rows m_i
  Matrix m_tilde;       // (I - P_C) M (I - P_C)
  Matrix sigma;         // empirical covariance used for the programs
  Matrix cov_scaled;    // M~ S M~^T
  Vector beta_n;        // lasso estimate projected onto C^T beta = 0
  Vector beta_u;
  Vector row_gamma;     // final radius per row after escalation
  std::vector<RowStatus> row_status;
  std::vector<bool> per_coord_feasible;
  Index n = 0;
};

// Throws SolverError naming the rows that stay infeasible after escalation.
DebiasResult debias(const RegressionProblem& problem, const FitResult& fit, double gamma,
                    const QpSettings& settings = {});

}  // namespace complasso
