#include "complasso/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "complasso/parallel.hpp"

namespace complasso {

double check_condition1(const ConstraintSet& constraints) {
  return constraints.complement().cwiseAbs().rowwise().sum().maxCoeff();
}

double check_condition2(const ConstraintSet& constraints) {
  const Vector d = constraints.complement().diagonal();
  Index where = 0;
  const double m = d.minCoeff(&where);
  if (m <= 1e-12) {
    throw InvalidInput("diagonal of I - P_C vanishes at coordinate " + std::to_string(where) +
                       "; the constraints force that coefficient to zero");
  }
  return m;
}

std::uint64_t binomial(std::uint64_t p, std::uint64_t k) {
  if (k > p) return 0;
  k = std::min(k, p - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = p - k + i;
    // r * num / i is exact at every step; guard the multiplication.
    if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;
  }
  return r;
}

namespace {

// Subset with the given lexicographic rank among k-subsets of [0, p).
void unrank(std::uint64_t rank, int p, int k, std::vector<int>& out) {
  out.resize(static_cast<std::size_t>(k));
  int next = 0;
  for (int i = 0; i < k; ++i) {
    for (int v = next;; ++v) {
      const std::uint64_t after = binomial(static_cast<std::uint64_t>(p - v - 1), static_cast<std::uint64_t>(k - i - 1));
      if (rank < after) {
        out[static_cast<std::size_t>(i)] = v;
        next = v + 1;
        break;
      }
      rank -= after;
    }
  }
}

bool advance(std::vector<int>& s, int p) {
  const int k = static_cast<int>(s.size());
  int i = k - 1;
  while (i >= 0 && s[static_cast<std::size_t>(i)] == p - k + i) --i;
  if (i < 0) return false;
  ++s[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

void check_budget(std::uint64_t count, const std::string& what) {
  if (count > kEnumerationCap) {
    throw InvalidInput(what + " needs " + std::to_string(count) + " subset evaluations; the enumeration cap is " +
                       std::to_string(kEnumerationCap));
  }
}

// Splits [0, total) into chunks, each reduced sequentially, then combined in
// chunk order so the answer does not depend on the thread count.
template <class Chunk>
void chunked(std::uint64_t total, int threads, Chunk&& chunk) {
  const std::uint64_t n_chunks = std::max<std::uint64_t>(1, std::min<std::uint64_t>(total, 64));
  parallel_for(static_cast<std::size_t>(n_chunks), threads, [&](std::size_t c) {
    const std::uint64_t lo = total * c / n_chunks;
    const std::uint64_t hi = total * (c + 1) / n_chunks;
    chunk(c, lo, hi);
  });
}

}  // namespace

RipBounds rip_constants(const Matrix& design, int k, int threads) {
  const int p = static_cast<int>(design.cols());
  if (k < 1 || k > p) throw InvalidInput("RIP order k must lie in [1, p]");
  const std::uint64_t total = binomial(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k));
  check_budget(total, "RIP of order " + std::to_string(k) + " at p = " + std::to_string(p));

  const Matrix gram = design.transpose() * design;
  std::vector<double> lo_part(64, std::numeric_limits<double>::infinity());
  std::vector<double> hi_part(64, -std::numeric_limits<double>::infinity());
  chunked(total, threads, [&](std::size_t c, std::uint64_t lo, std::uint64_t hi) {
    if (lo >= hi) return;
    std::vector<int> s;
    unrank(lo, p, k, s);
    Matrix sub(k, k);
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::uint64_t r = lo; r < hi; ++r) {
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = gram(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
      es.compute(sub, Eigen::EigenvaluesOnly);
      mn = std::min(mn, es.eigenvalues()[0]);
      mx = std::max(mx, es.eigenvalues()[k - 1]);
      advance(s, p);
    }
    lo_part[c] = mn;
    hi_part[c] = mx;
  });
  RipBounds out;
  out.lower = std::max(0.0, *std::min_element(lo_part.begin(), lo_part.end()));
  out.upper = *std::max_element(hi_part.begin(), hi_part.end());
  return out;
}

double roc_constant(const Matrix& design, int k1, int k2, int threads) {
  const int p = static_cast<int>(design.cols());
  if (k1 < 1 || k2 < 1 || k1 + k2 > p) throw InvalidInput("ROC orders must be positive with k1 + k2 <= p");
  // Enlarging a support never lowers the top singular value of the cross block,
  // so the supremum is attained at |S1| = k1, |S2| = k2.
  const std::uint64_t first = binomial(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k1));
  const std::uint64_t second = binomial(static_cast<std::uint64_t>(p - k1), static_cast<std::uint64_t>(k2));
  const bool overflow = second != 0 && first > std::numeric_limits<std::uint64_t>::max() / second;
  const std::uint64_t total = overflow ? std::numeric_limits<std::uint64_t>::max() : first * second;
  check_budget(total, "ROC of order (" + std::to_string(k1) + ", " + std::to_string(k2) + ") at p = " + std::to_string(p));

  const Matrix gram = design.transpose() * design;
  std::vector<double> part(64, 0.0);
  chunked(first, threads, [&](std::size_t c, std::uint64_t lo, std::uint64_t hi) {
    if (lo >= hi) return;
    std::vector<int> s1;
    unrank(lo, p, k1, s1);
    std::vector<int> rest;
    std::vector<int> idx;
    Matrix cross(k1, k2);
    double best = 0.0;
    for (std::uint64_t r = lo; r < hi; ++r) {
      rest.clear();
      for (int j = 0, a = 0; j < p; ++j) {
        if (a < k1 && s1[static_cast<std::size_t>(a)] == j) {
          ++a;
          continue;
        }
        rest.push_back(j);
      }
      const int m = static_cast<int>(rest.size());
      idx.resize(static_cast<std::size_t>(k2));
      for (int b = 0; b < k2; ++b) idx[static_cast<std::size_t>(b)] = b;
      do {
        for (int a = 0; a < k1; ++a)
          for (int b = 0; b < k2; ++b)
            cross(a, b) = gram(s1[static_cast<std::size_t>(a)], rest[static_cast<std::size_t>(idx[static_cast<std::size_t>(b)])]);
        Eigen::JacobiSVD<Matrix> svd(cross);
        best = std::max(best, svd.singularValues()[0]);
      } while (advance(idx, m));
      advance(s1, p);
    }
    part[c] = best;
  });
  return *std::max_element(part.begin(), part.end());
}

Matrix population_precision(const Matrix& sigma, const ConstraintSet& constraints) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != constraints.p()) {
    throw InvalidInput("covariance must be p x p");
  }
  const Matrix& q = constraints.complement();
  const Matrix s = q * sigma * q;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  const Vector& ev = es.eigenvalues();
  const double cut = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Matrix omega = Matrix::Zero(s.rows(), s.cols());
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cut) omega.noalias() += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose() / ev[i];
  }
  return omega;
}

std::pair<double, double> restricted_eigen_bounds(const Matrix& sigma, const ConstraintSet& constraints) {
  const Matrix& q = constraints.complement();
  const Matrix s = q * sigma * q;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  // The r smallest eigenvalues belong to range(C) and vanish.
  const Index skip = constraints.r();
  return {ev[skip], ev[ev.size() - 1]};
}

double kappa_proxy(const Matrix& z_tilde, const Matrix& omega) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (omega + omega.transpose()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix half = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  const Matrix w = z_tilde * half;
  double worst = 0.0;
  for (Index j = 0; j < w.cols(); ++j) {
    const double m2 = w.col(j).squaredNorm() / static_cast<double>(w.rows());
    if (m2 <= 1e-14) continue;
    const double m4 = w.col(j).array().pow(4).sum() / static_cast<double>(w.rows());
    worst = std::max(worst, std::sqrt(m4 / (3.0 * m2 * m2)));
  }
  return worst;
}

}  // namespace complasso
