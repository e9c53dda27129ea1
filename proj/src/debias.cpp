#include "complasso/debias.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "complasso/kernels.hpp"
#include "complasso/parallel.hpp"

namespace complasso {
namespace {

constexpr int kRefreshEvery = 64;     // sweeps between exact recomputations of S m
constexpr int kCertificateEvery = 32;  // sweeps/iterations between infeasibility checks

// Design with the unpenalized covariates partialled out, and the matching
// residual. Without extra covariates these are Z~ and y - Z~ beta.
struct EffectiveData {
  Matrix design;
  Vector residual;
};

EffectiveData effective_data(const RegressionProblem& problem, const FitResult* fit) {
  EffectiveData out{problem.z_tilde, Vector()};
  if (fit != nullptr) {
    out.residual = problem.y - problem.z_tilde * fit->coef.beta;
  }
  if (problem.q() > 0) {
    Eigen::HouseholderQR<Matrix> qr(problem.extra);
    const Matrix q = qr.householderQ() * Matrix::Identity(problem.n(), problem.q());
    out.design -= q * (q.transpose() * out.design);
    if (fit != nullptr) out.residual -= q * (q.transpose() * out.residual);
  }
  return out;
}

double kkt_residual(const Vector& m, const Vector& grad_minus_b, double gamma) {
  double worst = 0.0;
  for (Index j = 0; j < m.size(); ++j) {
    const double g = grad_minus_b[j];
    const double v = m[j] == 0.0 ? std::max(std::fabs(g) - gamma, 0.0)
                                 : std::fabs(g + (m[j] > 0.0 ? gamma : -gamma));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

void QpSettings::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be nonnegative");
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) throw InvalidInput("QP tolerances must be positive");
  if (max_iter < 1) throw InvalidInput("max_iter must be positive");
  if (!(rho > 0.0)) throw InvalidInput("rho must be positive");
  if (!(escalation_factor > 1.0) || max_escalations < 0) throw InvalidInput("invalid gamma escalation");
}

const char* to_string(RowStatus status) {
  switch (status) {
    case RowStatus::kSolved: return "solved";
    case RowStatus::kInfeasible: return "infeasible";
    case RowStatus::kMaxIter: return "max_iter";
  }
  return "unknown";
}

RowProgramSolver::RowProgramSolver(Matrix sigma) : sigma_(std::move(sigma)) {
  if (sigma_.rows() != sigma_.cols()) throw InvalidInput("covariance must be square");
  const Index p = sigma_.rows();
  if (p == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_);
  const Vector& values = eig.eigenvalues();
  const double top = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
  const double cutoff = 1e-10 * top;
  std::vector<Index> keep;
  std::vector<Index> drop;
  for (Index k = 0; k < p; ++k) (values[k] > cutoff ? keep : drop).push_back(k);
  rank_ = static_cast<Index>(keep.size());
  range_vectors_.resize(p, rank_);
  range_values_.resize(rank_);
  for (Index c = 0; c < rank_; ++c) {
    range_vectors_.col(c) = eig.eigenvectors().col(keep[static_cast<std::size_t>(c)]);
    range_values_[c] = values[keep[static_cast<std::size_t>(c)]];
  }
  null_vectors_.resize(p, static_cast<Index>(drop.size()));
  for (Index c = 0; c < null_vectors_.cols(); ++c) {
    null_vectors_.col(c) = eig.eigenvectors().col(drop[static_cast<std::size_t>(c)]);
  }
}

bool RowProgramSolver::certifies_infeasible(const Vector& direction, const Vector& b, double gamma) const {
  if (null_vectors_.cols() == 0) return false;
  const Vector d = null_vectors_ * (null_vectors_.transpose() * direction);
  const double l1 = d.lpNorm<1>();
  if (!(l1 > 0.0)) return false;
  return b.dot(d) > (gamma + 1e-10 * (1.0 + b.lpNorm<Eigen::Infinity>())) * l1;
}

void RowProgramSolver::finish(RowQpResult& res, const Vector& b, double gamma, double) const {
  const Vector sm = sigma_ * res.m;
  res.objective = res.m.dot(sm);
  res.violation = std::max((sm - b).lpNorm<Eigen::Infinity>() - gamma, 0.0);
}

RowQpResult RowProgramSolver::solve(const Vector& b, const QpSettings& settings) const {
  settings.validate();
  if (b.size() != sigma_.rows()) throw InvalidInput("row target has wrong length");
  if (sigma_.rows() == 0) return RowQpResult{Vector(), RowStatus::kSolved, 0, 0.0, 0.0};
  if (b.lpNorm<Eigen::Infinity>() <= settings.gamma) {
    // m = 0 is feasible and the objective is nonnegative.
    RowQpResult res{Vector::Zero(b.size()), RowStatus::kSolved, 0, 0.0, 0.0};
    return res;
  }
  if (certifies_infeasible(b, b, settings.gamma)) {
    return RowQpResult{Vector::Zero(b.size()), RowStatus::kInfeasible, 0, 0.0,
                       std::numeric_limits<double>::infinity()};
  }
  return settings.method == QpMethod::kAdmm ? solve_admm(b, settings) : solve_cd(b, settings);
}

RowQpResult RowProgramSolver::solve_cd(const Vector& b, const QpSettings& settings) const {
  const Index p = sigma_.rows();
  const double gamma = settings.gamma;
  const double tol = 0.5 * std::min(settings.tol_primal, settings.tol_dual);
  const Vector diag = sigma_.diagonal();
  const double tiny = 1e-14 * std::max(1.0, diag.maxCoeff());

  RowQpResult res;
  res.m = Vector::Zero(p);
  for (Index j = 0; j < p; ++j) {
    if (diag[j] <= tiny && std::fabs(b[j]) > gamma) {
      res.status = RowStatus::kInfeasible;
      res.violation = std::fabs(b[j]) - gamma;
      return res;
    }
  }

  Vector& m = res.m;
  Vector grad = Vector::Zero(p);  // S m
  Vector checkpoint = m;
  for (int it = 1; it <= settings.max_iter; ++it) {
    res.iterations = it;
    for (Index j = 0; j < p; ++j) {
      if (diag[j] <= tiny) continue;
      const double u = b[j] - grad[j] + diag[j] * m[j];
      const double updated = soft_threshold(u, gamma) / diag[j];
      const double delta = updated - m[j];
      if (delta != 0.0) {
        kernels::axpy(delta, column_span(sigma_, j), span_of(grad));
        m[j] = updated;
      }
    }
    if (it % kRefreshEvery == 0) grad.noalias() = sigma_ * m;
    if (kkt_residual(m, grad - b, gamma) <= tol) {
      grad.noalias() = sigma_ * m;
      if (kkt_residual(m, grad - b, gamma) <= tol) {
        res.status = RowStatus::kSolved;
        break;
      }
    }
    if (it % kCertificateEvery == 0) {
      if (certifies_infeasible(m - checkpoint, b, gamma)) {
        res.status = RowStatus::kInfeasible;
        break;
      }
      checkpoint = m;
    }
  }
  finish(res, b, gamma, tol);
  return res;
}

RowQpResult RowProgramSolver::solve_admm(const Vector& b, const QpSettings& settings) const {
  const Index p = sigma_.rows();
  const double gamma = settings.gamma;
  const Vector lower = b.array() - gamma;
  const Vector upper = b.array() + gamma;
  double rho = settings.rho;

  Vector x = Vector::Zero(p);
  Vector z = b;
  Vector u = Vector::Zero(p);
  Vector u_checkpoint = u;
  RowQpResult res;
  res.status = RowStatus::kMaxIter;
  for (int it = 1; it <= settings.max_iter; ++it) {
    res.iterations = it;
    // x-step: argmin x^T S^+ x + rho/2 ||x - (z - u)||^2 over range(S).
    const Vector coords = range_vectors_.transpose() * (z - u);
    const Vector shrink = (rho * range_values_.array() / (2.0 + rho * range_values_.array())).matrix();
    x.noalias() = range_vectors_ * coords.cwiseProduct(shrink);
    const Vector z_prev = z;
    z = (x + u).cwiseMax(lower).cwiseMin(upper);
    u += x - z;

    const double primal = (x - z).lpNorm<Eigen::Infinity>();
    const double dual = rho * (z - z_prev).lpNorm<Eigen::Infinity>();
    if (primal <= settings.tol_primal && dual <= settings.tol_dual) {
      res.status = RowStatus::kSolved;
      break;
    }
    if (it % kCertificateEvery == 0) {
      if (certifies_infeasible(u_checkpoint - u, b, gamma)) {
        res.status = RowStatus::kInfeasible;
        break;
      }
      // Rebalance rho from the relative residuals; the scaled dual moves with it.
      const double rel_primal = primal / std::max({x.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>(), 1e-12});
      const double rel_dual = dual / std::max(rho * u.lpNorm<Eigen::Infinity>(), 1e-12);
      const double ratio = rel_primal / std::max(rel_dual, 1e-300);
      if (ratio > 10.0 || ratio < 0.1) {
        const double next = std::clamp(rho * std::sqrt(ratio), 1e-6, 1e6);
        u *= rho / next;
        rho = next;
      }
      u_checkpoint = u;
    }
  }
  // m with S m = x, taken from the range of S.
  const Vector coords = range_vectors_.transpose() * x;
  res.m = range_vectors_ * coords.cwiseQuotient(range_values_);
  finish(res, b, gamma, settings.tol_primal);
  return res;
}

RowQpResult solve_row_qp(const Matrix& sigma, const Vector& b, const QpSettings& settings) {
  return RowProgramSolver(sigma).solve(b, settings);
}

Matrix empirical_cov(const RegressionProblem& problem) {
  const EffectiveData data = effective_data(problem, nullptr);
  Matrix s = data.design.transpose() * data.design / static_cast<double>(problem.n());
  return 0.5 * (s + s.transpose());
}

DebiasResult debias(const RegressionProblem& problem, const FitResult& fit, double gamma,
                    const QpSettings& settings) {
  const Index n = problem.n();
  const Index p = problem.p();
  if (fit.coef.beta.size() != p) throw InvalidInput("fit does not match problem");
  QpSettings base = settings;
  base.gamma = gamma;
  base.validate();

  const Matrix& complement = problem.constraints.complement();
  const EffectiveData data = effective_data(problem, &fit);

  DebiasResult out;
  out.n = n;
  out.sigma = data.design.transpose() * data.design / static_cast<double>(n);
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  out.beta_n = complement * fit.coef.beta;
  out.m = Matrix::Zero(p, p);
  out.row_gamma = Vector::Constant(p, gamma);
  out.row_status.assign(static_cast<std::size_t>(p), RowStatus::kMaxIter);
  out.per_coord_feasible.assign(static_cast<std::size_t>(p), false);

  const RowProgramSolver solver(out.sigma);
  std::vector<RowQpResult> rows(static_cast<std::size_t>(p));
  parallel_for(static_cast<std::size_t>(p), settings.threads, [&](std::size_t i) {
    QpSettings row = base;
    const Vector target = complement.col(static_cast<Index>(i));
    for (int attempt = 0; attempt <= base.max_escalations; ++attempt) {
      rows[i] = solver.solve(target, row);
      if (rows[i].status == RowStatus::kSolved) break;
      if (attempt < base.max_escalations) row.gamma *= base.escalation_factor;
    }
    out.row_gamma[static_cast<Index>(i)] = row.gamma;
  });

  std::string failed;
  for (Index i = 0; i < p; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    out.row_status[static_cast<std::size_t>(i)] = r.status;
    const bool ok = r.status == RowStatus::kSolved;
    out.per_coord_feasible[static_cast<std::size_t>(i)] = ok;
    if (!ok) failed += (failed.empty() ? "" : ", ") + std::to_string(i);
    out.m.row(i) = r.m.transpose();
  }
  if (!failed.empty()) {
    throw SolverError("de-bias program infeasible after gamma escalation for rows: " + failed);
  }

  out.m_tilde = complement * out.m * complement;
  out.beta_u = out.beta_n + out.m_tilde * (data.design.transpose() * data.residual) / static_cast<double>(n);
  out.cov_scaled = out.m_tilde * out.sigma * out.m_tilde.transpose();
  out.cov_scaled = 0.5 * (out.cov_scaled + out.cov_scaled.transpose());
  return out;
}

}  // namespace complasso
