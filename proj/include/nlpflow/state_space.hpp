#pragma once

#include <optional>

#include <Eigen/Core>

#include "nlpflow/problem.hpp"

namespace nlpflow {

/// Coordinates in which the flow and the solvers move.
///
/// For a plain Problem the state is x itself. For a ReducedProblem the state
/// is xi in R^{n1}; the full point is (xi, phi(xi)) and the step direction
/// is the first n1 components of the full-space field at that point.
class StateSpace {
 public:
  explicit StateSpace(Problem problem) : problem_(std::move(problem)) {}
  explicit StateSpace(ReducedProblem reduced)
      : problem_(reduced.parent()), reduced_(std::move(reduced)) {}

  const Problem& problem() const { return problem_; }
  bool is_reduced() const { return reduced_.has_value(); }
  const ReducedProblem* reduced() const { return reduced_ ? &*reduced_ : nullptr; }

  /// Dimension of the state vector.
  std::size_t dim() const { return reduced_ ? reduced_->n1() : problem_.n(); }

  /// Equalities that the state coordinates do not satisfy by construction.
  std::size_t free_equalities() const { return reduced_ ? 0 : problem_.m(); }

  Eigen::VectorXd lift(const Eigen::VectorXd& z) const;

  /// First dim() components of a full-space vector.
  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const { return full.head(static_cast<Eigen::Index>(dim())); }

  double objective(const Eigen::VectorXd& z) const;
  Eigen::VectorXd inequalities(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd inequality_jacobian(const Eigen::VectorXd& z) const;

  /// Accepts a state vector (dim entries) or a full point (n entries). A full
  /// point must agree with lift() of its head to `tol`.
  Eigen::VectorXd state_from(const Eigen::VectorXd& v, double tol = 1e-8) const;

 private:
  Problem problem_;
  std::optional<ReducedProblem> reduced_;
};

}  // namespace nlpflow
