#include "complasso/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "complasso/inference.hpp"
#include "complasso/parallel.hpp"
#include "complasso/tuning.hpp"

namespace complasso {

const char* to_string(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::kMultiple: return "multiple";
    case ConstraintMode::kOne: return "one";
    case ConstraintMode::kNone: return "none";
    case ConstraintMode::kMisspecified: return "misspecified";
  }
  return "?";
}

ConstraintMode parse_constraint_mode(const std::string& text) {
  if (text == "multiple" || text == "multi") return ConstraintMode::kMultiple;
  if (text == "one") return ConstraintMode::kOne;
  if (text == "none" || text == "no") return ConstraintMode::kNone;
  if (text == "misspecified") return ConstraintMode::kMisspecified;
  throw InvalidInput("unknown constraint mode '" + text + "' (expected multiple, one, none or misspecified)");
}

Vector default_beta(Index p) {
  if (p < 16) throw InvalidInput("default beta needs p >= 16");
  Vector b = Vector::Zero(p);
  b[0] = 1.0;
  b[1] = -0.8;
  b[2] = 0.4;
  b[5] = -0.6;
  b[10] = -1.5;
  b[12] = 1.2;
  b[15] = 0.3;
  return b;
}

std::vector<Index> multiple_group_sizes(Index p) {
  if (p < 42) throw InvalidInput("the eight-block constraints need p >= 42");
  return {10, 6, 4, 3, 7, 2, 8, p - 40};
}

ConstraintSet misspecified_constraints(Index p) {
  if (p < 32) throw InvalidInput("the misspecified constraints need p >= 32");
  return build_constraints({5, 7, 11, 7, p - 30});
}

ConstraintSet constraints_for(ConstraintMode mode, Index p) {
  switch (mode) {
    case ConstraintMode::kMultiple: return build_constraints(multiple_group_sizes(p));
    case ConstraintMode::kOne: return build_constraints({p});
    case ConstraintMode::kNone: return ConstraintSet::none(p);
    case ConstraintMode::kMisspecified: return misspecified_constraints(p);
  }
  throw InvalidInput("unknown constraint mode");
}

void SimConfig::finalize() {
  if (p < 45) throw InvalidInput("simulation design needs p >= 45");
  if (n < 4) throw InvalidInput("simulation needs n >= 4");
  if (!(zeta > -1.0 && zeta < 1.0)) throw InvalidInput("zeta must lie in (-1, 1)");
  if (n_reps < 1) throw InvalidInput("n_reps must be positive");
  if (!(sigma_noise >= 0.0)) throw InvalidInput("sigma_noise must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  if (beta_true.size() == 0) beta_true = default_beta(p);
  if (beta_true.size() != p) throw InvalidInput("beta_true must have length p");
  const ConstraintSet truth = build_constraints(multiple_group_sizes(p));
  const double v = truth.violation(beta_true);
  if (v > 1e-12) {
    throw InvalidInput("beta_true violates the zero-sum block constraints (max block sum " + std::to_string(v) +
                       "); supply a corrected beta");
  }
  cdmm.validate();
}

Vector SimConfig::nu() const {
  Vector v = Vector::Ones(p);
  v.head(std::min<Index>(5, p)).setConstant(static_cast<double>(p) / 2.0);
  return v;
}

Dataset gen_dataset(const SimConfig& config, Index n, RandomStream& stream) {
  const Index p = config.p;
  const Vector nu = config.nu();
  const double rho = config.zeta;
  const double innov = std::sqrt(1.0 - rho * rho);
  Matrix logw(n, p);
  for (Index i = 0; i < n; ++i) {
    // AR(1) recursion gives unit variances and Cov(x_j, x_k) = zeta^|j-k|.
    double x = stream.normal();
    logw(i, 0) = x;
    for (Index j = 1; j < p; ++j) {
      x = rho * x + innov * stream.normal();
      logw(i, j) = x;
    }
  }
  logw.rowwise() += nu.transpose();

  // Closing in log space: z_ij = log w_ij - log sum_k w_ik, with a stable
  // log-sum-exp since nu_j = p/2 makes w large.
  Matrix z(n, p);
  Matrix props(n, p);
  for (Index i = 0; i < n; ++i) {
    const double top = logw.row(i).maxCoeff();
    const double lse = top + std::log((logw.row(i).array() - top).exp().sum());
    z.row(i) = logw.row(i).array() - lse;
    props.row(i) = z.row(i).array().exp();
  }
  Vector noise(n);
  for (Index i = 0; i < n; ++i) noise[i] = stream.normal();
  Vector y = z * config.beta_true + config.sigma_noise * noise;
  return Dataset{CompositionMatrix::close(props), std::move(logw), std::move(z), std::move(y), std::move(noise)};
}

ReplicationData gen_replication(const SimConfig& config, std::uint64_t rep) {
  RandomStream stream(config.seed, rep);
  Dataset train = gen_dataset(config, config.n, stream);
  Dataset test = gen_dataset(config, config.n, stream);
  return {std::move(train), std::move(test)};
}

ReplicationResult run_replication(const SimConfig& config, std::uint64_t rep) {
  ReplicationResult out;
  try {
    const ReplicationData data = gen_replication(config, rep);
    const ConstraintSet cs = constraints_for(config.constraint_mode, config.p);
    const RegressionProblem train = design_from_log(data.train.log_composition, cs, data.train.y);
    const RegressionProblem test =
        design_from_log(data.test.log_composition, cs, data.test.y, Matrix(), train.centering);

    const auto [fit, tune] = scaled_lasso(train, config.cdmm);
    QpSettings qp = config.qp;
    qp.threads = 1;
    const DebiasResult db = debias(train, fit, tune.gamma, qp);
    const InferenceResult inf = confidence_intervals(db, tune.sigma_hat, config.alpha, train.n());

    const Index p = config.p;
    out.covered.resize(static_cast<std::size_t>(p));
    out.ci_length.resize(static_cast<std::size_t>(p));
    int tp = 0, fp = 0, pos = 0, neg = 0;
    for (Index i = 0; i < p; ++i) {
      const auto& c = inf.coefs[static_cast<std::size_t>(i)];
      const double b = config.beta_true[i];
      out.covered[static_cast<std::size_t>(i)] = c.ci_lower <= b && b <= c.ci_upper;
      out.ci_length[static_cast<std::size_t>(i)] = c.ci_upper - c.ci_lower;
      const bool selected = c.ci_lower > 0.0 || c.ci_upper < 0.0;
      if (b != 0.0) {
        ++pos;
        tp += selected;
      } else {
        ++neg;
        fp += selected;
      }
    }
    out.tpr = pos > 0 ? static_cast<double>(tp) / pos : 0.0;
    out.fpr = neg > 0 ? static_cast<double>(fp) / neg : 0.0;
    for (Index i = 0; i < p; ++i) out.escalated_rows += db.row_gamma[i] > tune.gamma * (1.0 + 1e-12);

    out.pred_lasso = predict(test, fit.coef).mse;
    std::vector<Index> lasso_support;
    for (Index j = 0; j < p; ++j)
      if (fit.coef.beta[j] != 0.0) lasso_support.push_back(j);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
      out.pred_refit_lasso = predict(test, refit_constrained_ols(train, lasso_support)).mse;
    } catch (const SolverError&) {
      out.pred_refit_lasso = nan;
    }
    try {
      out.pred_refit_ci = predict(test, refit_constrained_ols(train, select_by_ci(inf))).mse;
    } catch (const SolverError&) {
      out.pred_refit_ci = nan;
    }
    out.sigma_hat = tune.sigma_hat;
    out.lambda_hat = tune.lambda_hat;
    out.ok = true;
  } catch (const SolverError& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan};
  }
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  s.min = values.front();
  s.max = values.back();
  s.median = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(m);
  return s;
}

SimReport run_experiment(SimConfig config) {
  config.finalize();
  const auto start = std::chrono::steady_clock::now();
  std::vector<ReplicationResult> reps(static_cast<std::size_t>(config.n_reps));
  parallel_for(reps.size(), config.threads, [&](std::size_t r) { reps[r] = run_replication(config, r); });

  SimReport rep;
  rep.config = config;
  const Index p = config.p;
  rep.coverage = Vector::Zero(p);
  std::vector<std::vector<double>> lengths(static_cast<std::size_t>(p));
  double sum_tpr = 0.0, sum_fpr = 0.0, sum_lasso = 0.0, sum_rl = 0.0, sum_rc = 0.0, sum_len = 0.0;
  int n_rl = 0, n_rc = 0;
  // Aggregated in replication order so results do not depend on scheduling.
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& x = reps[r];
    if (!x.ok) {
      ++rep.failed;
      rep.failures.push_back("rep " + std::to_string(r) + ": " + x.error);
      continue;
    }
    ++rep.completed;
    for (Index i = 0; i < p; ++i) {
      rep.coverage[i] += x.covered[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
      lengths[static_cast<std::size_t>(i)].push_back(x.ci_length[static_cast<std::size_t>(i)]);
      sum_len += x.ci_length[static_cast<std::size_t>(i)];
    }
    sum_tpr += x.tpr;
    sum_fpr += x.fpr;
    sum_lasso += x.pred_lasso;
    if (std::isfinite(x.pred_refit_lasso)) {
      sum_rl += x.pred_refit_lasso;
      ++n_rl;
    } else {
      ++rep.refit_lasso_failed;
    }
    if (std::isfinite(x.pred_refit_ci)) {
      sum_rc += x.pred_refit_ci;
      ++n_rc;
    } else {
      ++rep.refit_ci_failed;
    }
    rep.escalated_rows += x.escalated_rows;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double done = static_cast<double>(rep.completed);
  if (rep.completed > 0) {
    rep.coverage /= done;
    rep.tpr = sum_tpr / done;
    rep.fpr = sum_fpr / done;
    rep.pred_lasso = sum_lasso / done;
    rep.mean_length = sum_len / (done * static_cast<double>(p));
  } else {
    rep.coverage.setConstant(nan);
    rep.tpr = rep.fpr = rep.pred_lasso = rep.mean_length = nan;
  }
  rep.pred_refit_lasso = n_rl > 0 ? sum_rl / n_rl : nan;
  rep.pred_refit_ci = n_rc > 0 ? sum_rc / n_rc : nan;
  rep.coverage_summary = summarize(std::vector<double>(rep.coverage.data(), rep.coverage.data() + p));
  for (auto& l : lengths) rep.length_by_coord.push_back(summarize(l));
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace complasso
