#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace complasso {

using Matrix = Eigen::MatrixXd;  // column-major; columns are contiguous
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Bad user input or violated precondition. The CLI maps this to exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not produce a usable answer (singular system,
// infeasible program after escalation). The CLI maps this to exit code 3.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::span<const double> column_span(const Matrix& m, Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

inline std::span<double> span_of(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<const double> span_of(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace complasso
