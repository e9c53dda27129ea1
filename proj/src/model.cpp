#include "complasso/model.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace complasso {
namespace {

void check_labels(const std::vector<std::string>& ids, Index expected, const char* what) {
  if (!ids.empty() && static_cast<Index>(ids.size()) != expected) {
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(expected) + " labels, got " +
                       std::to_string(ids.size()));
  }
}

}  // namespace

CompositionMatrix::CompositionMatrix(Matrix values, std::vector<std::string> row_ids,
                                     std::vector<std::string> col_ids)
    : values_(std::move(values)), row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)) {
  check_labels(row_ids_, values_.rows(), "row ids");
  check_labels(col_ids_, values_.cols(), "column ids");
  for (Index i = 0; i < values_.rows(); ++i) {
    for (Index j = 0; j < values_.cols(); ++j) {
      const double v = values_(i, j);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidInput("composition entry (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") is not strictly positive; replace zeros first");
      }
    }
    const double s = values_.row(i).sum();
    if (std::fabs(s - 1.0) > 1e-9) {
      throw InvalidInput("composition row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
  }
}

CompositionMatrix CompositionMatrix::close(const Matrix& positive, std::vector<std::string> row_ids,
                                           std::vector<std::string> col_ids) {
  Matrix closed = positive;
  for (Index i = 0; i < closed.rows(); ++i) {
    const double s = closed.row(i).sum();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidInput("row " + std::to_string(i) + " has nonpositive total");
    }
    closed.row(i) /= s;
  }
  return CompositionMatrix(std::move(closed), std::move(row_ids), std::move(col_ids));
}

ConstraintSet::ConstraintSet(Matrix c, std::vector<std::vector<Index>> groups)
    : c_(std::move(c)), groups_(std::move(groups)) {
  projector_ = c_ * c_.transpose();
  complement_ = Matrix::Identity(c_.rows(), c_.rows()) - projector_;
}

ConstraintSet ConstraintSet::from_matrix(const Matrix& c) {
  if (c.cols() == 0) return none(c.rows());
  if (c.cols() > c.rows()) throw InvalidInput("constraint matrix has more columns than rows");
  Eigen::ColPivHouseholderQR<Matrix> qr(c);
  if (qr.rank() < c.cols()) throw InvalidInput("constraint matrix is rank deficient");
  Matrix q = qr.householderQ() * Matrix::Identity(c.rows(), c.cols());
  return ConstraintSet(std::move(q), {});
}

ConstraintSet ConstraintSet::from_groups(Index p, std::vector<std::vector<Index>> groups) {
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  Matrix c = Matrix::Zero(p, static_cast<Index>(groups.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    if (members.size() < 2) {
      throw InvalidInput("constraint group " + std::to_string(g) +
                         " has fewer than two members; a singleton forces its coefficient to zero");
    }
    const double w = 1.0 / std::sqrt(static_cast<double>(members.size()));
    for (Index j : members) {
      if (j < 0 || j >= p) throw InvalidInput("constraint group index out of range");
      if (seen[static_cast<std::size_t>(j)]) throw InvalidInput("constraint groups overlap");
      seen[static_cast<std::size_t>(j)] = true;
      c(j, static_cast<Index>(g)) = w;
    }
  }
  return ConstraintSet(std::move(c), std::move(groups));
}

ConstraintSet ConstraintSet::none(Index p) { return ConstraintSet(Matrix::Zero(p, 0), {}); }

std::vector<Index> ConstraintSet::group_sizes() const {
  std::vector<Index> sizes;
  sizes.reserve(groups_.size());
  for (const auto& g : groups_) sizes.push_back(static_cast<Index>(g.size()));
  return sizes;
}

double ConstraintSet::violation(const Vector& beta) const {
  if (r() == 0) return 0.0;
  return apply_transpose(beta).cwiseAbs().maxCoeff();
}

ConstraintSet build_constraints(const std::vector<Index>& group_sizes) {
  if (group_sizes.empty()) throw InvalidInput("group sizes must be nonempty");
  std::vector<std::vector<Index>> groups;
  Index start = 0;
  for (Index m : group_sizes) {
    if (m < 2) throw InvalidInput("group size " + std::to_string(m) + " is below 2");
    std::vector<Index> block(static_cast<std::size_t>(m));
    std::iota(block.begin(), block.end(), start);
    groups.push_back(std::move(block));
    start += m;
  }
  return ConstraintSet::from_groups(start, std::move(groups));
}

CompositionMatrix replace_zeros(const Matrix& raw_counts, double pseudo, std::vector<std::string> row_ids,
                                std::vector<std::string> col_ids) {
  if (!(pseudo > 0.0)) throw InvalidInput("pseudo count must be positive");
  Matrix filled = raw_counts;
  for (Index i = 0; i < filled.rows(); ++i) {
    bool any_positive = false;
    for (Index j = 0; j < filled.cols(); ++j) {
      double& v = filled(i, j);
      if (v < 0.0 || !std::isfinite(v)) {
        throw InvalidInput("count (" + std::to_string(i) + ", " + std::to_string(j) + ") is negative");
      }
      if (v > 0.0) any_positive = true;
      if (v == 0.0) v = pseudo;
    }
    if (!any_positive) throw InvalidInput("row " + std::to_string(i) + " is all zeros");
  }
  return CompositionMatrix::close(filled, std::move(row_ids), std::move(col_ids));
}

Matrix clr_transform(const CompositionMatrix& comp, const ConstraintSet& constraints) {
  if (comp.cols() != constraints.p()) throw InvalidInput("composition and constraints disagree on p");
  const Matrix logs = comp.values().array().log().matrix();
  return logs * constraints.complement();
}

RegressionProblem design_from_log(const Matrix& log_values, const ConstraintSet& constraints, const Vector& y,
                                  const Matrix& extra, const std::optional<Centering>& centering) {
  const Index n = log_values.rows();
  const Index p = log_values.cols();
  if (p != constraints.p()) throw InvalidInput("design and constraints disagree on p");
  if (y.size() != n) throw InvalidInput("response length differs from number of samples");
  if (extra.size() != 0 && extra.rows() != n) throw InvalidInput("covariate rows differ from samples");
  if (!log_values.allFinite() || !y.allFinite() || (extra.size() != 0 && !extra.allFinite())) {
    throw InvalidInput("design or response contains non-finite values");
  }

  RegressionProblem prob;
  if (centering) {
    prob.centering = *centering;
    if (prob.centering.log_mean.size() != p) throw InvalidInput("centering has wrong length");
  } else {
    prob.centering.log_mean = log_values.colwise().mean().transpose();
    prob.centering.y_mean = y.mean();
    prob.centering.extra_mean = extra.size() ? Vector(extra.colwise().mean().transpose()) : Vector();
  }
  prob.z = log_values.rowwise() - prob.centering.log_mean.transpose();
  prob.z_tilde = prob.z * constraints.complement();
  prob.y = y.array() - prob.centering.y_mean;
  if (extra.size() != 0) {
    if (prob.centering.extra_mean.size() != extra.cols()) throw InvalidInput("centering has wrong length");
    prob.extra = extra.rowwise() - prob.centering.extra_mean.transpose();
  } else {
    prob.extra = Matrix(n, 0);
  }
  prob.constraints = constraints;
  return prob;
}

RegressionProblem clr_design(const CompositionMatrix& comp, const ConstraintSet& constraints, const Vector& y,
                             const Matrix& extra, const std::optional<Centering>& centering) {
  RegressionProblem prob =
      design_from_log(comp.values().array().log().matrix(), constraints, y, extra, centering);
  prob.taxon_names = comp.col_ids();
  return prob;
}

}  // namespace complasso
