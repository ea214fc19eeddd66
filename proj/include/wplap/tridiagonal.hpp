#pragma once

#include <stdexcept>

#include <Eigen/Core>

namespace wplap {

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square tridiagonal matrix; `lower` and `upper` have one entry fewer than `diag`.
struct Tridiagonal {
  Eigen::VectorXd lower;
  Eigen::VectorXd diag;
  Eigen::VectorXd upper;

  static Tridiagonal symmetric(Eigen::VectorXd diag, Eigen::VectorXd off);
  Eigen::Index size() const { return diag.size(); }
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd dense() const;
  /// Leading n-by-n block.
  Tridiagonal leading(Eigen::Index n) const;
};

/// Gaussian elimination with partial pivoting (LAPACK dgtsv).
Eigen::VectorXd solve(const Tridiagonal& A, const Eigen::VectorXd& rhs);

}  // namespace wplap
