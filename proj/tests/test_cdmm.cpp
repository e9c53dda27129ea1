#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "complasso/cdmm.hpp"
#include "oracles/misc_oracles.hpp"
#include "oracles/qp_oracle.hpp"
#include "test_util.hpp"

using namespace complasso;

namespace {

double objective_of(const RegressionProblem& prob, const Vector& beta, double lambda) {
  const Vector r = prob.y - prob.z_tilde * beta;
  return 0.5 * r.squaredNorm() / prob.n() + lambda * beta.lpNorm<1>();
}

double lambda_max(const RegressionProblem& prob) {
  return (prob.z_tilde.transpose() * prob.y).cwiseAbs().maxCoeff() / prob.n();
}

}  // namespace

TEST(SoftThreshold, Basics) {
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
  EXPECT_EQ(soft_threshold(-1.0, 1.0), 0.0);
}

TEST(Cdmm, SettingsValidation) {
  CdmmSettings s;
  s.mu = 0;
  EXPECT_THROW(s.validate(), InvalidInput);
  s = {};
  s.lambda = -1;
  EXPECT_THROW(s.validate(), InvalidInput);
  s = {};
  s.tol_beta = 0;
  EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(Cdmm, CoordinateUpdateMinimizesAugmentedLagrangian) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto prob = testutil::random_problem(gen, 25, {3, 4});
    CdmmSettings s;
    s.lambda = 0.02;
    s.mu = trial % 2 ? 1.0 : 2.5;
    CdmmSolver solver(prob, s);
    Coefficients start{Vector::Random(prob.p()), Vector()};
    solver.warm_start(start);
    solver.update_multiplier();
    solver.update_multiplier();
    const Vector xi = solver.xi();
    const Index j = trial % prob.p();
    Vector beta = solver.beta();
    const auto f = [&](long double t) {
      Vector b = beta;
      b[j] = static_cast<double>(t);
      const oracle::LVec r = oracle::to_long(Vector(prob.y - prob.z_tilde * b));
      const oracle::LVec ct = oracle::to_long(Vector(prob.constraints.c().transpose() * b + xi));
      const oracle::LVec x = oracle::to_long(xi);
      return 0.5L * r.squaredNorm() / prob.n() + (long double)s.lambda * oracle::to_long(b).cwiseAbs().sum() +
             0.5L * s.mu * (ct.squaredNorm() - x.squaredNorm());
    };
    const double ref = oracle::golden_section(f, -20.0L, 20.0L);
    solver.update_coordinate(j);
    EXPECT_NEAR(solver.beta()[j], ref, 1e-7) << "trial " << trial;
    // The same update through the library's own objective bookkeeping.
    EXPECT_NEAR(solver.augmented_lagrangian(), static_cast<double>(f(solver.beta()[j])), 1e-11);
  }
}

TEST(Cdmm, MatchesInteriorPointOracle) {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 25; ++trial) {
    const Index p = 4 + trial % 9;
    const Index n = 15 + 2 * trial;
    const std::vector<Index> sizes = trial % 3 == 0 ? std::vector<Index>{p} : testutil::random_partition(gen, p);
    const auto prob = testutil::random_problem(gen, n, sizes);
    CdmmSettings s;
    s.lambda = (0.05 + 0.3 * (trial % 4) / 3.0) * lambda_max(prob);
    const FitResult fr = fit(prob, s);
    ASSERT_TRUE(fr.converged);
    EXPECT_LE(fr.constraint_violation, 1e-8);
    bool ok = false;
    const oracle::LVec ref = oracle::lasso_oracle(oracle::to_long(prob.z_tilde), oracle::to_long(prob.y),
                                                  oracle::to_long(prob.constraints.c()), s.lambda, &ok);
    ASSERT_TRUE(ok);
    const Vector refd = ref.cast<double>();
    const double f_ref = objective_of(prob, refd, s.lambda);
    EXPECT_NEAR(fr.objective, f_ref, 1e-7 * std::fabs(f_ref)) << "trial " << trial;
    EXPECT_NEAR(fr.objective, objective_of(prob, fr.coef.beta, s.lambda), 1e-12);
    EXPECT_LT(kkt_violation(prob, fr), 1e-6);
  }
}

TEST(Cdmm, LargePenaltyGivesZero) {
  std::mt19937_64 gen(23);
  const auto prob = testutil::random_problem(gen, 30, {3, 3});
  CdmmSettings s;
  s.lambda = 1.01 * lambda_max(prob);
  const FitResult fr = fit(prob, s);
  EXPECT_TRUE(fr.converged);
  EXPECT_EQ(fr.coef.beta.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Cdmm, ZeroPenaltyRecoversConstrainedLeastSquares) {
  std::mt19937_64 gen(24);
  const auto prob = testutil::random_problem(gen, 40, {3, 4});
  CdmmSettings s;
  s.lambda = 0.0;
  s.tol_beta = 1e-10;
  s.tol_constraint = 1e-11;
  s.max_inner = 200000;
  const FitResult fr = fit(prob, s);
  const Vector ref = oracle::constrained_ls_nullspace(prob.z_tilde, prob.y, prob.constraints.c().transpose());
  EXPECT_LT((fr.coef.beta - ref).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Cdmm, ExtraCovariatesAreUnpenalized) {
  std::mt19937_64 gen(25);
  Vector beta;
  auto base = testutil::random_problem(gen, 60, {3, 3}, 0.1, 0.3, &beta);
  std::normal_distribution<double> d;
  Matrix extra(60, 1);
  for (Index i = 0; i < 60; ++i) extra(i, 0) = d(gen);
  const Vector y = base.y + 2.0 * extra.col(0);
  const auto prob = design_from_log(base.z, base.constraints, y, extra);
  CdmmSettings s;
  s.lambda = 10.0 * lambda_max(prob);  // every taxon coefficient shrunk to zero
  const FitResult fr = fit(prob, s);
  EXPECT_EQ(fr.coef.beta.lpNorm<Eigen::Infinity>(), 0.0);
  const double ls = prob.extra.col(0).dot(prob.y) / prob.extra.col(0).squaredNorm();
  EXPECT_NEAR(fr.coef.gamma[0], ls, 1e-6);
}

TEST(Cdmm, WarmStartReachesSameSolution) {
  std::mt19937_64 gen(26);
  const auto prob = testutil::random_problem(gen, 50, {4, 4, 4});
  CdmmSettings s;
  s.lambda = 0.1 * lambda_max(prob);
  const FitResult cold = fit(prob, s);
  Coefficients warm{cold.coef.beta * 0.5, Vector()};
  const FitResult w = fit(prob, s, &warm);
  EXPECT_NEAR(w.objective, cold.objective, 1e-9 * cold.objective);
}

TEST(Cdmm, Unconstrained) {
  std::mt19937_64 gen(27);
  auto prob = testutil::random_problem(gen, 40, {6});
  prob.constraints = ConstraintSet::none(6);
  prob.z_tilde = prob.z;
  CdmmSettings s;
  s.lambda = 0.1 * lambda_max(prob);
  const FitResult fr = fit(prob, s);
  EXPECT_TRUE(fr.converged);
  EXPECT_EQ(fr.n_outer, 1);
  bool ok = false;
  const oracle::LVec ref =
      oracle::lasso_oracle(oracle::to_long(prob.z), oracle::to_long(prob.y), oracle::LMat(6, 0), s.lambda, &ok);
  ASSERT_TRUE(ok);
  EXPECT_NEAR(fr.objective, objective_of(prob, ref.cast<double>(), s.lambda), 1e-8);
}

TEST(Cdmm, RejectsBadData) {
  std::mt19937_64 gen(28);
  auto prob = testutil::random_problem(gen, 20, {3});
  auto bad = prob;
  bad.y[0] = std::nan("");
  EXPECT_THROW(CdmmSolver(bad, CdmmSettings{}), InvalidInput);
  auto flat = prob;
  flat.extra = Matrix::Zero(20, 1);
  EXPECT_THROW(CdmmSolver(flat, CdmmSettings{}), InvalidInput);
}
