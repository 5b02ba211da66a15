#include "nlpflow/cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace nlpflow {

Cholesky::Cholesky(const Eigen::MatrixXd& m, const std::string& what)
    : l_(Eigen::MatrixXd::Zero(m.rows(), m.cols())),
      min_pivot_(std::numeric_limits<double>::infinity()) {
  if (m.rows() != m.cols()) {
    throw ModelError(fmt::format("{}: Cholesky needs a square matrix, got {}x{}", what, m.rows(), m.cols()));
  }
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index p = 0; p < j; ++p) pivot -= l_(j, p) * l_(j, p);
    if (!(pivot > 0.0)) {
      throw FactorizationError(
          fmt::format("{} is not positive definite: pivot {} = {:.6g}", what, j, pivot),
          static_cast<std::size_t>(j), pivot);
    }
    min_pivot_ = std::min(min_pivot_, pivot);
    const double d = std::sqrt(pivot);
    l_(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index p = 0; p < j; ++p) s -= l_(i, p) * l_(j, p);
      l_(i, j) = s / d;
    }
  }
}

Eigen::VectorXd Cholesky::solve(const Eigen::VectorXd& b) const {
  return solve(Eigen::MatrixXd(b)).col(0);
}

Eigen::MatrixXd Cholesky::solve(const Eigen::MatrixXd& b) const {
  const Eigen::Index n = size();
  if (b.rows() != n) {
    throw ModelError(fmt::format("Cholesky solve: rhs has {} rows, expected {}", b.rows(), n));
  }
  Eigen::MatrixXd y = b;
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = y(i, c);
      for (Eigen::Index p = 0; p < i; ++p) s -= l_(i, p) * y(p, c);
      y(i, c) = s / l_(i, i);
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      double s = y(i, c);
      for (Eigen::Index p = i + 1; p < n; ++p) s -= l_(p, i) * y(p, c);
      y(i, c) = s / l_(i, i);
    }
  }
  return y;
}

}  // namespace nlpflow
