#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "complasso/model.hpp"

using namespace complasso;

namespace {

Matrix random_positive(std::mt19937_64& gen, Index n, Index p) {
  std::uniform_real_distribution<double> u(0.05, 3.0);
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) m(i, j) = u(gen);
  return m;
}

std::vector<Index> random_sizes(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> count(1, 5), size(2, 6);
  std::vector<Index> s(static_cast<std::size_t>(count(gen)));
  for (auto& v : s) v = size(gen);
  return s;
}

}  // namespace

TEST(ReplaceZeros, CountsRow) {
  Matrix raw(1, 2);
  raw << 0, 10;
  const auto c = replace_zeros(raw, 0.5);
  EXPECT_NEAR(c.values()(0, 0), 0.5 / 10.5, 1e-15);
  EXPECT_NEAR(c.values()(0, 1), 10 / 10.5, 1e-15);
}

TEST(ReplaceZeros, NoZerosOnlyCloses) {
  Matrix raw(1, 2);
  raw << 5, 5;
  const auto c = replace_zeros(raw, 0.5);
  EXPECT_DOUBLE_EQ(c.values()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(c.values()(0, 1), 0.5);
}

TEST(ReplaceZeros, ProportionPseudo) {
  Matrix raw(1, 3);
  raw << 0, 0, 1;
  const auto c = replace_zeros(raw, 0.05);
  EXPECT_NEAR(c.values()(0, 0), 0.05 / 1.1, 1e-15);
  EXPECT_NEAR(c.values()(0, 1), 0.05 / 1.1, 1e-15);
  EXPECT_NEAR(c.values()(0, 2), 1 / 1.1, 1e-15);
}

TEST(ReplaceZeros, Rejections) {
  Matrix zero_row(2, 2);
  zero_row << 1, 2, 0, 0;
  EXPECT_THROW(replace_zeros(zero_row, 0.5), InvalidInput);
  Matrix neg(1, 2);
  neg << -1, 2;
  EXPECT_THROW(replace_zeros(neg, 0.5), InvalidInput);
  Matrix ok(1, 2);
  ok << 1, 2;
  EXPECT_THROW(replace_zeros(ok, 0.0), InvalidInput);
}

TEST(CompositionMatrix, ValidatesClosureAndPositivity) {
  Matrix m(1, 2);
  m << 0.3, 0.7;
  EXPECT_NO_THROW(CompositionMatrix{m});
  m << 0.3, 0.6;
  EXPECT_THROW(CompositionMatrix{m}, InvalidInput);
  m << 0.0, 1.0;
  EXPECT_THROW(CompositionMatrix{m}, InvalidInput);
}

TEST(BuildConstraints, SingleBlockOfTwo) {
  const auto cs = build_constraints({2});
  EXPECT_NEAR(cs.c()(0, 0), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cs.c()(1, 0), 1 / std::sqrt(2.0), 1e-15);
  Matrix want(2, 2);
  want << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LT((cs.complement() - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildConstraints, OneGroupIsNormalizedOnes) {
  const auto cs = build_constraints({7});
  EXPECT_LT((cs.c() - Vector::Constant(7, 1 / std::sqrt(7.0))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildConstraints, EightBlockDesign) {
  const auto cs = build_constraints({10, 6, 4, 3, 7, 2, 8, 10});
  EXPECT_EQ(cs.r(), 8);
  EXPECT_EQ(cs.p(), 50);
  EXPECT_EQ(cs.group_sizes(), (std::vector<Index>{10, 6, 4, 3, 7, 2, 8, 10}));
  // Block diagonal projector with (1/m) 1 1^T blocks.
  EXPECT_NEAR(cs.projector()(0, 9), 0.1, 1e-15);
  EXPECT_NEAR(cs.projector()(9, 10), 0.0, 1e-15);
  EXPECT_NEAR(cs.projector()(10, 15), 1.0 / 6, 1e-15);
}

TEST(BuildConstraints, Rejections) {
  EXPECT_THROW(build_constraints({}), InvalidInput);
  EXPECT_THROW(build_constraints({3, 1}), InvalidInput);
  EXPECT_THROW(ConstraintSet::from_groups(4, {{0, 1}, {1, 2}}), InvalidInput);
  EXPECT_THROW(ConstraintSet::from_groups(4, {{0, 5}}), InvalidInput);
}

TEST(BuildConstraints, OrthonormalAndIdempotentProperty) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 150; ++trial) {
    const auto sizes = random_sizes(gen);
    const auto cs = build_constraints(sizes);
    const Index r = cs.r();
    EXPECT_LT((cs.c().transpose() * cs.c() - Matrix::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((cs.projector() * cs.projector() - cs.projector()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(FromMatrix, OrthonormalizesGeneralConstraints) {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> d;
  Matrix c(6, 2);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 2; ++j) c(i, j) = d(gen);
  const auto cs = ConstraintSet::from_matrix(c);
  EXPECT_LT((cs.c().transpose() * cs.c() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  // Same column space.
  EXPECT_LT((cs.projector() * c - c).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(cs.groups().empty());
}

TEST(ClrTransform, EqualPartsCenterToZero) {
  Matrix m(1, 2);
  m << 0.5, 0.5;
  const Matrix z = clr_transform(CompositionMatrix{m}, build_constraints({2}));
  EXPECT_NEAR(z(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(z(0, 1), 0.0, 1e-15);
}

TEST(ClrTransform, CentersLogValues) {
  const double e2 = std::exp(2.0);
  Matrix m(1, 2);
  m << e2 / (e2 + 1), 1 / (e2 + 1);
  const Matrix z = clr_transform(CompositionMatrix{m}, build_constraints({2}));
  EXPECT_NEAR(z(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(z(0, 1), -1.0, 1e-14);
}

TEST(ClrTransform, BlockFormulaOnRandomInputs) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto comp = CompositionMatrix::close(random_positive(gen, 3, 4));
    const Matrix z = clr_transform(comp, build_constraints({2, 2}));
    for (Index i = 0; i < 3; ++i) {
      const auto& x = comp.values();
      const double h1 = 0.5 * std::log(x(i, 0) / x(i, 1));
      const double h2 = 0.5 * std::log(x(i, 2) / x(i, 3));
      EXPECT_NEAR(z(i, 0), h1, 1e-13);
      EXPECT_NEAR(z(i, 1), -h1, 1e-13);
      EXPECT_NEAR(z(i, 2), h2, 1e-13);
      EXPECT_NEAR(z(i, 3), -h2, 1e-13);
    }
  }
}

TEST(ClrDesign, SubcompositionalCoherenceProperty) {
  // Rescaling every part of one group leaves Z~ unchanged.
  std::mt19937_64 gen(14);
  std::uniform_real_distribution<double> factor(0.01, 100.0);
  for (int trial = 0; trial < 120; ++trial) {
    const auto sizes = random_sizes(gen);
    const auto cs = build_constraints(sizes);
    const Index p = cs.p(), n = 6;
    const Matrix raw = random_positive(gen, n, p);
    Matrix scaled = raw;
    const std::size_t g = std::uniform_int_distribution<std::size_t>(0, sizes.size() - 1)(gen);
    for (Index i = 0; i < n; ++i) {
      const double f = factor(gen);
      for (Index j : cs.groups()[g]) scaled(i, j) *= f;
    }
    const Vector y = Vector::LinSpaced(n, -1, 1);
    const auto a = clr_design(CompositionMatrix::close(raw), cs, y);
    const auto b = clr_design(CompositionMatrix::close(scaled), cs, y);
    EXPECT_LT((a.z_tilde - b.z_tilde).cwiseAbs().maxCoeff(), 1e-10) << "trial " << trial;
  }
}

TEST(ClrDesign, InvariantsHold) {
  std::mt19937_64 gen(15);
  const auto cs = build_constraints({3, 4, 5});
  Matrix extra(20, 2);
  std::normal_distribution<double> d;
  for (Index i = 0; i < 20; ++i) extra(i, 0) = d(gen), extra(i, 1) = d(gen) + 5;
  Vector y(20);
  for (Index i = 0; i < 20; ++i) y[i] = d(gen) + 3;
  const auto prob = clr_design(CompositionMatrix::close(random_positive(gen, 20, 12)), cs, y, extra);
  EXPECT_LT((prob.z_tilde * cs.c()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(prob.y.mean(), 0.0, 1e-12);
  EXPECT_LT(prob.extra.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(prob.z.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(prob.q(), 2);
}

TEST(ClrDesign, SuppliedCenteringIsReused) {
  std::mt19937_64 gen(16);
  const auto cs = build_constraints({4});
  const Matrix a = random_positive(gen, 10, 4), b = random_positive(gen, 5, 4);
  const Vector ya = Vector::LinSpaced(10, 0, 1), yb = Vector::LinSpaced(5, 3, 4);
  const auto train = clr_design(CompositionMatrix::close(a), cs, ya);
  const auto test = clr_design(CompositionMatrix::close(b), cs, yb, Matrix(), train.centering);
  EXPECT_NEAR(test.y.mean(), yb.mean() - ya.mean(), 1e-12);
  const Matrix logb = CompositionMatrix::close(b).values().array().log().matrix();
  EXPECT_LT((test.z - (logb.rowwise() - train.centering.log_mean.transpose())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ClrDesign, Rejections) {
  const auto cs = build_constraints({2, 2});
  Matrix m = Matrix::Constant(3, 4, 0.25);
  EXPECT_THROW(clr_design(CompositionMatrix{m}, build_constraints({5}), Vector::Zero(3)), InvalidInput);
  EXPECT_THROW(clr_design(CompositionMatrix{m}, cs, Vector::Zero(2)), InvalidInput);
}
