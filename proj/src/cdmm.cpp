#include "complasso/cdmm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "complasso/kernels.hpp"

namespace complasso {

void CdmmSettings::validate() const {
  if (!(mu > 0.0)) throw InvalidInput("mu must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be nonnegative");
  if (!(tol_beta > 0.0) || !(tol_constraint > 0.0)) throw InvalidInput("tolerances must be positive");
  if (max_outer < 1 || max_inner < 1) throw InvalidInput("iteration caps must be positive");
}

double soft_threshold(double t, double lambda) {
  if (t > lambda) return t - lambda;
  if (t < -lambda) return t + lambda;
  return 0.0;
}

CdmmSolver::CdmmSolver(const RegressionProblem& problem, const CdmmSettings& settings)
    : prob_(problem), settings_(settings) {
  settings_.validate();
  const Index n = problem.n();
  const Index p = problem.p();
  if (n < 1) throw InvalidInput("problem has no samples");
  if (!problem.z_tilde.allFinite() || !problem.y.allFinite() || !problem.extra.allFinite()) {
    throw InvalidInput("NaN or infinite value in design or response");
  }
  inv_n_ = 1.0 / static_cast<double>(n);
  ct_ = problem.constraints.c().transpose();
  col_sq_.resize(p);
  c_row_sq_.resize(p);
  for (Index j = 0; j < p; ++j) {
    col_sq_[j] = kernels::sum_squares(column_span(problem.z_tilde, j)) * inv_n_;
    c_row_sq_[j] = ct_.rows() ? ct_.col(j).squaredNorm() : 0.0;
    if (col_sq_[j] == 0.0 && c_row_sq_[j] == 0.0) {
      throw InvalidInput("column " + std::to_string(j) + " is degenerate (zero design column, no constraint)");
    }
  }
  extra_sq_.resize(problem.q());
  for (Index k = 0; k < problem.q(); ++k) {
    extra_sq_[k] = kernels::sum_squares(column_span(problem.extra, k));
    if (extra_sq_[k] == 0.0) throw InvalidInput("extra covariate " + std::to_string(k) + " is constant");
  }
  beta_ = Vector::Zero(p);
  gamma_ = Vector::Zero(problem.q());
  xi_ = Vector::Zero(ct_.rows());
  recompute_state();
}

void CdmmSolver::recompute_state() {
  resid_ = prob_.y - prob_.z_tilde * beta_;
  if (prob_.q() > 0) resid_ -= prob_.extra * gamma_;
  ct_beta_ = ct_ * beta_;
}

void CdmmSolver::set_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be nonnegative");
  settings_.lambda = lambda;
}

void CdmmSolver::warm_start(const Coefficients& start) {
  if (start.beta.size() != beta_.size()) throw InvalidInput("warm start has wrong length");
  beta_ = start.beta;
  if (start.gamma.size() == gamma_.size()) gamma_ = start.gamma;
  recompute_state();
}

void CdmmSolver::reset_multiplier() { xi_.setZero(); }

double CdmmSolver::update_coordinate(Index j) {
  const double mu = settings_.mu;
  const double old = beta_[j];
  const double corr = kernels::dot(column_span(prob_.z_tilde, j), span_of(resid_)) * inv_n_;
  double cross = 0.0;  // C_j^T (C^T beta + xi), then remove beta_j's own share
  if (ct_.rows() > 0) cross = ct_.col(j).dot(ct_beta_ + xi_);
  const double numer = corr + col_sq_[j] * old - mu * (cross - c_row_sq_[j] * old);
  const double denom = col_sq_[j] + mu * c_row_sq_[j];
  const double updated = soft_threshold(numer, settings_.lambda) / denom;
  const double delta = updated - old;
  if (delta != 0.0) {
    kernels::axpy(-delta, column_span(prob_.z_tilde, j), span_of(resid_));
    if (ct_.rows() > 0) ct_beta_ += delta * ct_.col(j);
    beta_[j] = updated;
  }
  return std::fabs(delta);
}

double CdmmSolver::sweep() {
  double max_change = 0.0;
  for (Index j = 0; j < beta_.size(); ++j) max_change = std::max(max_change, update_coordinate(j));
  for (Index k = 0; k < gamma_.size(); ++k) {
    const auto col = column_span(prob_.extra, k);
    const double delta = kernels::dot(col, span_of(resid_)) / extra_sq_[k];
    if (delta != 0.0) {
      kernels::axpy(-delta, col, span_of(resid_));
      gamma_[k] += delta;
      max_change = std::max(max_change, std::fabs(delta));
    }
  }
  return max_change;
}

void CdmmSolver::update_multiplier() { xi_ += ct_beta_; }

double CdmmSolver::objective() const {
  return 0.5 * inv_n_ * kernels::sum_squares(span_of(resid_)) + settings_.lambda * beta_.lpNorm<1>();
}

double CdmmSolver::augmented_lagrangian() const {
  const double mu = settings_.mu;
  return objective() + 0.5 * mu * ((ct_beta_ + xi_).squaredNorm() - xi_.squaredNorm());
}

FitResult CdmmSolver::run() {
  FitResult out;
  out.lambda = settings_.lambda;
  const bool constrained = ct_.rows() > 0;
  Vector previous = beta_;
  for (int outer = 1; outer <= settings_.max_outer; ++outer) {
    recompute_state();
    for (int s = 0; s < settings_.max_inner; ++s) {
      const double change = sweep();
      ++out.n_sweeps;
      const double scale = std::max(1.0, beta_.lpNorm<Eigen::Infinity>());
      if (change <= settings_.tol_beta * scale) break;
    }
    ct_beta_ = ct_ * beta_;
    out.n_outer = outer;
    const double violation = constrained ? ct_beta_.lpNorm<Eigen::Infinity>() : 0.0;
    const double step = (beta_ - previous).lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, beta_.lpNorm<Eigen::Infinity>());
    previous = beta_;
    if (!constrained) {
      out.converged = true;
      break;
    }
    update_multiplier();
    if (violation <= settings_.tol_constraint && step <= settings_.tol_beta * scale) {
      out.converged = true;
      break;
    }
  }
  recompute_state();
  out.coef.beta = beta_;
  out.coef.gamma = gamma_;
  out.constraint_violation = constrained ? ct_beta_.lpNorm<Eigen::Infinity>() : 0.0;
  out.objective = objective();
  out.multiplier = settings_.mu * xi_;
  if (out.constraint_violation > settings_.tol_constraint) out.converged = false;
  return out;
}

FitResult fit(const RegressionProblem& problem, const CdmmSettings& settings, const Coefficients* warm) {
  CdmmSolver solver(problem, settings);
  if (warm != nullptr) solver.warm_start(*warm);
  return solver.run();
}

double kkt_violation(const RegressionProblem& problem, const FitResult& fit) {
  const Index n = problem.n();
  Vector resid = problem.y - problem.z_tilde * fit.coef.beta;
  if (problem.q() > 0) resid -= problem.extra * fit.coef.gamma;
  Vector grad = problem.z_tilde.transpose() * resid / static_cast<double>(n);
  if (problem.constraints.r() > 0) grad -= problem.constraints.c() * fit.multiplier;
  double worst = 0.0;
  for (Index j = 0; j < grad.size(); ++j) {
    const double b = fit.coef.beta[j];
    const double v = b == 0.0 ? std::max(0.0, std::fabs(grad[j]) - fit.lambda)
                              : std::fabs(grad[j] - fit.lambda * (b > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace complasso
