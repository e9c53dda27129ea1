#pragma once

#include <optional>
#include <string>
#include <vector>

#include "complasso/types.hpp"

namespace complasso {

// n x p matrix of strictly positive proportions whose rows sum to one.
class CompositionMatrix {
 public:
  // Validates positivity and closure (row sums within 1e-9 of one).
  explicit CompositionMatrix(Matrix values, std::vector<std::string> row_ids = {},
                             std::vector<std::string> col_ids = {});

  // Rescales each row of a strictly positive matrix to sum to one.
  static CompositionMatrix close(const Matrix& positive, std::vector<std::string> row_ids = {},
                                 std::vector<std::string> col_ids = {});

  const Matrix& values() const { return values_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<std::string>& col_ids() const { return col_ids_; }

 private:
  Matrix values_;
  std::vector<std::string> row_ids_;
  std::vector<std::string> col_ids_;
};

// Linear equality constraints C^T beta = 0 with C (p x r) orthonormal.
class ConstraintSet {
 public:
  // Orthonormalizes the columns of `c` (p x r, full column rank). Groups are
  // left empty; use this for constraints without block structure.
  static ConstraintSet from_matrix(const Matrix& c);

  // Zero-sum constraint on each index set. Sets must be disjoint, in range and
  // have at least two members.
  static ConstraintSet from_groups(Index p, std::vector<std::vector<Index>> groups);

  // No constraints at all (r = 0, P_C = 0).
  static ConstraintSet none(Index p);

  Index p() const { return c_.rows(); }
  Index r() const { return c_.cols(); }
  const Matrix& c() const { return c_; }
  const Matrix& projector() const { return projector_; }
  // I - P_C
  const Matrix& complement() const { return complement_; }
  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  // Sizes of the groups, in order.
  std::vector<Index> group_sizes() const;

  // C^T beta
  Vector apply_transpose(const Vector& beta) const { return c_.transpose() * beta; }
  // max_g |(C^T beta)_g|, 0 when r = 0.
  double violation(const Vector& beta) const;

 private:
  ConstraintSet(Matrix c, std::vector<std::vector<Index>> groups);

  Matrix c_;
  Matrix projector_;
  Matrix complement_;
  std::vector<std::vector<Index>> groups_;
};

// Contiguous zero-sum blocks of the given sizes; p is the sum of the sizes.
// Every size must be at least 2 (a singleton block forces beta_j = 0).
ConstraintSet build_constraints(const std::vector<Index>& group_sizes);

// Replaces zero counts by `pseudo` and closes each row.
CompositionMatrix replace_zeros(const Matrix& raw_counts, double pseudo,
                                std::vector<std::string> row_ids = {},
                                std::vector<std::string> col_ids = {});

// log(X)(I - P_C), no centering across samples. For block constraints each
// entry is the log proportion minus its group's mean log proportion.
Matrix clr_transform(const CompositionMatrix& comp, const ConstraintSet& constraints);

// Column means removed from a training design; reused to place test data on
// the training scale.
struct Centering {
  Vector log_mean;    // length p, mean of log proportions
  double y_mean = 0.0;
  Vector extra_mean;  // length q
};

// Centered regression problem y = Z~ beta + X_e gamma + eps, C^T beta = 0.
struct RegressionProblem {
  Matrix z;        // centered log proportions, n x p
  Matrix z_tilde;  // z (I - P_C), n x p
  Vector y;        // centered response
  Matrix extra;    // centered unpenalized covariates, n x q (q may be 0)
  ConstraintSet constraints = ConstraintSet::none(0);
  Centering centering;
  std::vector<std::string> taxon_names;
  std::vector<std::string> extra_names;

  Index n() const { return z.rows(); }
  Index p() const { return z.cols(); }
  Index q() const { return extra.cols(); }
};

// Builds the centered problem from log proportions. When `centering` is given
// (e.g. from a training set) it is used instead of this data's own means.
RegressionProblem design_from_log(const Matrix& log_values, const ConstraintSet& constraints, const Vector& y,
                                  const Matrix& extra = Matrix(),
                                  const std::optional<Centering>& centering = std::nullopt);

// Log, project, center. Requires a strictly positive composition.
RegressionProblem clr_design(const CompositionMatrix& comp, const ConstraintSet& constraints, const Vector& y,
                             const Matrix& extra = Matrix(),
                             const std::optional<Centering>& centering = std::nullopt);

struct Coefficients {
  Vector beta;   // length p
  Vector gamma;  // length q, extra covariates
};

}  // namespace complasso
