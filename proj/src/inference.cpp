#include "complasso/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "complasso/normal.hpp"

namespace complasso {

InferenceResult confidence_intervals(const Vector& estimate, const Vector& cov_diag, double sigma_hat,
                                     double alpha, Index n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  if (n < 1) throw InvalidInput("n must be positive");
  if (!(sigma_hat >= 0.0)) throw InvalidInput("sigma_hat must be nonnegative");
  if (estimate.size() != cov_diag.size()) throw InvalidInput("estimate and variance lengths differ");

  InferenceResult out;
  out.alpha = alpha;
  out.sigma_hat = sigma_hat;
  out.n = n;
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double root_n = std::sqrt(static_cast<double>(n));
  out.coefs.resize(static_cast<std::size_t>(estimate.size()));
  for (Index i = 0; i < estimate.size(); ++i) {
    auto& c = out.coefs[static_cast<std::size_t>(i)];
    const double var = cov_diag[i];
    if (var < -1e-12) throw InvalidInput("negative variance for coefficient " + std::to_string(i));
    c.estimate = estimate[i];
    c.std_err = sigma_hat * std::sqrt(std::max(var, 0.0)) / root_n;
    const double half = z * c.std_err;
    c.ci_lower = c.estimate - half;
    c.ci_upper = c.estimate + half;
    if (c.std_err > 0.0) {
      // 2 [1 - Phi(|b| / se)] written through erfc to keep small p-values exact.
      c.p_value = std::erfc(std::fabs(c.estimate) / c.std_err / std::sqrt(2.0));
    } else {
      c.degenerate = true;
      c.p_value = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

InferenceResult confidence_intervals(const DebiasResult& debiased, double sigma_hat, double alpha, Index n) {
  return confidence_intervals(debiased.beta_u, debiased.cov_scaled.diagonal(), sigma_hat, alpha, n);
}

std::vector<Index> select_by_ci(const InferenceResult& inference) {
  std::vector<Index> picked;
  for (std::size_t i = 0; i < inference.coefs.size(); ++i) {
    const auto& c = inference.coefs[i];
    if (c.ci_lower > 0.0 || c.ci_upper < 0.0) picked.push_back(static_cast<Index>(i));
  }
  return picked;
}

Coefficients refit_constrained_ols(const RegressionProblem& problem, const std::vector<Index>& support) {
  const Index p = problem.p();
  const Index q = problem.q();
  const Index s = static_cast<Index>(support.size());
  std::vector<Index> slot(static_cast<std::size_t>(p), -1);
  for (Index k = 0; k < s; ++k) {
    const Index j = support[static_cast<std::size_t>(k)];
    if (j < 0 || j >= p) throw InvalidInput("support index out of range");
    if (slot[static_cast<std::size_t>(j)] >= 0) throw InvalidInput("support has duplicates");
    slot[static_cast<std::size_t>(j)] = k;
  }

  // Restriction of the constraints to the support. Block constraints restrict
  // to "selected members sum to zero"; a general C restricts its rows.
  std::vector<Vector> rows;
  const ConstraintSet& cs = problem.constraints;
  if (!cs.groups().empty()) {
    for (const auto& g : cs.groups()) {
      Vector a = Vector::Zero(s);
      bool touched = false;
      for (Index j : g) {
        if (slot[static_cast<std::size_t>(j)] >= 0) {
          a[slot[static_cast<std::size_t>(j)]] = 1.0;
          touched = true;
        }
      }
      if (touched) rows.push_back(std::move(a));
    }
  } else {
    for (Index c = 0; c < cs.r(); ++c) {
      Vector a(s);
      for (Index k = 0; k < s; ++k) a[k] = cs.c()(support[static_cast<std::size_t>(k)], c);
      if (a.lpNorm<Eigen::Infinity>() > 1e-12) rows.push_back(std::move(a));
    }
  }
  const Index m = static_cast<Index>(rows.size());
  const Index vars = s + q;

  Matrix design(problem.n(), vars);
  for (Index k = 0; k < s; ++k) design.col(k) = problem.z_tilde.col(support[static_cast<std::size_t>(k)]);
  if (q > 0) design.rightCols(q) = problem.extra;

  Matrix kkt = Matrix::Zero(vars + m, vars + m);
  kkt.topLeftCorner(vars, vars) = design.transpose() * design;
  for (Index c = 0; c < m; ++c) {
    kkt.block(vars + c, 0, 1, s) = rows[static_cast<std::size_t>(c)].transpose();
    kkt.block(0, vars + c, s, 1) = rows[static_cast<std::size_t>(c)];
  }
  Vector rhs = Vector::Zero(vars + m);
  rhs.head(vars) = design.transpose() * problem.y;

  Coefficients out{Vector::Zero(p), Vector::Zero(q)};
  if (vars + m == 0) return out;
  Eigen::FullPivLU<Matrix> lu(kkt);
  lu.setThreshold(1e-12);
  if (lu.rank() < kkt.rows()) {
    throw SolverError("refit KKT system is singular (rank " + std::to_string(lu.rank()) + " of " +
                      std::to_string(kkt.rows()) + "); support of size " + std::to_string(s) +
                      " is not identifiable from n = " + std::to_string(problem.n()) + " samples");
  }
  const Vector sol = lu.solve(rhs);
  for (Index k = 0; k < s; ++k) out.beta[support[static_cast<std::size_t>(k)]] = sol[k];
  if (q > 0) out.gamma = sol.segment(s, q);
  return out;
}

Prediction predict(const RegressionProblem& test, const Coefficients& coef) {
  if (coef.beta.size() != test.p()) throw InvalidInput("coefficient length does not match test design columns");
  if (coef.gamma.size() != test.q()) throw InvalidInput("covariate coefficients do not match test covariates");
  Prediction out;
  out.fitted = test.z_tilde * coef.beta;
  if (test.q() > 0) out.fitted += test.extra * coef.gamma;
  out.mse = (test.y - out.fitted).squaredNorm() / static_cast<double>(test.n());
  return out;
}

}  // namespace complasso

namespace complasso {

LoocvResult loocv(const RegressionProblem& problem,
                  const std::function<Coefficients(const RegressionProblem&)>& fitter) {
  const Index n = problem.n();
  const Index p = problem.p();
  const Index q = problem.q();
  if (n < 3) throw InvalidInput("leave-one-out needs n >= 3");
  // Undo the centering so each fold can recenter on its own training rows.
  Matrix logs = problem.z;
  logs.rowwise() += problem.centering.log_mean.transpose();
  const Vector y = problem.y.array() + problem.centering.y_mean;
  Matrix extra = problem.extra;
  if (q > 0) extra.rowwise() += problem.centering.extra_mean.transpose();

  LoocvResult out;
  out.predictions.resize(n);
  for (Index i = 0; i < n; ++i) {
    Matrix lt(n - 1, p);
    Vector yt(n - 1);
    Matrix et(n - 1, q);
    for (Index r = 0, k = 0; r < n; ++r) {
      if (r == i) continue;
      lt.row(k) = logs.row(r);
      yt[k] = y[r];
      if (q > 0) et.row(k) = extra.row(r);
      ++k;
    }
    const RegressionProblem train = design_from_log(lt, problem.constraints, yt, et);
    const Coefficients coef = fitter(train);
    const Vector zi = (logs.row(i).transpose() - train.centering.log_mean);
    double pred = train.centering.y_mean + zi.dot(problem.constraints.complement() * coef.beta);
    if (q > 0) pred += (extra.row(i).transpose() - train.centering.extra_mean).dot(coef.gamma);
    out.predictions[i] = pred;
  }
  const double sse = (y - out.predictions).squaredNorm();
  const double sst = (y.array() - y.mean()).square().sum();
  out.mse = sse / static_cast<double>(n);
  out.r_squared = sst > 0.0 ? 1.0 - sse / sst : 0.0;
  return out;
}

}  // namespace complasso
