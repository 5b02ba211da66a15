#pragma once

#include <string>

#include <Eigen/Core>

#include "nlpflow/error.hpp"

namespace nlpflow {

/// Dense Cholesky factorization M = L L' for small symmetric positive
/// definite matrices. Construction throws FactorizationError naming the
/// first non-positive pivot; `what` prefixes the message.
class Cholesky {
 public:
  explicit Cholesky(const Eigen::MatrixXd& m, const std::string& what = "matrix");

  Eigen::Index size() const { return l_.rows(); }
  const Eigen::MatrixXd& lower() const { return l_; }

  /// Smallest diagonal entry of L, squared (the smallest pivot).
  double min_pivot() const { return min_pivot_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

 private:
  Eigen::MatrixXd l_;
  double min_pivot_;
};

}  // namespace nlpflow
