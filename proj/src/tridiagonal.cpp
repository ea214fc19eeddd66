#include "wplap/tridiagonal.hpp"

#include <string>

#include <lapacke.h>

namespace wplap {

Tridiagonal Tridiagonal::symmetric(Eigen::VectorXd diag, Eigen::VectorXd off) {
  Tridiagonal t;
  t.lower = off;
  t.upper = std::move(off);
  t.diag = std::move(diag);
  return t;
}

Eigen::VectorXd Tridiagonal::multiply(const Eigen::VectorXd& x) const {
  const Eigen::Index n = size();
  Eigen::VectorXd y = diag.cwiseProduct(x);
  if (n > 1) {
    y.head(n - 1) += upper.cwiseProduct(x.tail(n - 1));
    y.tail(n - 1) += lower.cwiseProduct(x.head(n - 1));
  }
  return y;
}

Eigen::MatrixXd Tridiagonal::dense() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = diag[i];
    if (i + 1 < n) {
      m(i, i + 1) = upper[i];
      m(i + 1, i) = lower[i];
    }
  }
  return m;
}

Tridiagonal Tridiagonal::leading(Eigen::Index n) const {
  Tridiagonal t;
  t.diag = diag.head(n);
  t.lower = lower.head(std::max<Eigen::Index>(n - 1, 0));
  t.upper = upper.head(std::max<Eigen::Index>(n - 1, 0));
  return t;
}

Eigen::VectorXd solve(const Tridiagonal& A, const Eigen::VectorXd& rhs) {
  const lapack_int n = static_cast<lapack_int>(A.size());
  if (rhs.size() != n) throw std::invalid_argument("tridiagonal solve: size mismatch");
  Eigen::VectorXd dl = A.lower, d = A.diag, du = A.upper, x = rhs;
  if (n == 0) return x;
  const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(), d.data(),
                                        du.data(), x.data(), n);
  if (info > 0) {
    throw SingularSystem("tridiagonal system is singular at pivot " + std::to_string(info));
  }
  if (info < 0) throw std::invalid_argument("dgtsv: bad argument " + std::to_string(-info));
  return x;
}

}  // namespace wplap
