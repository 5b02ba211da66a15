#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nlpflow/expr.hpp"

namespace nlpflow {

/// min theta(x) subject to h_i(x) = 0 (i < m) and g_j(x) <= 0 (j < k).
class Problem {
 public:
  /// Validates m < n and that every expression is declared over `names`.
  Problem(std::vector<std::string> names, Expr objective, std::vector<Expr> equalities,
          std::vector<Expr> inequalities);

  std::size_t n() const { return names_.size(); }
  std::size_t m() const { return equalities_.size(); }
  std::size_t k() const { return inequalities_.size(); }

  const std::vector<std::string>& names() const { return names_; }
  const Expr& objective() const { return objective_; }
  const std::vector<Expr>& equalities() const { return equalities_; }
  const std::vector<Expr>& inequalities() const { return inequalities_; }

 private:
  std::vector<std::string> names_;
  Expr objective_;
  std::vector<Expr> equalities_;
  std::vector<Expr> inequalities_;
};

struct Residuals {
  Eigen::VectorXd h;  // length m
  Eigen::VectorXd g;  // length k
};

struct Jacobians {
  Eigen::MatrixXd A;  // m x n, rows grad h_i
  Eigen::MatrixXd B;  // k x n, rows grad g_j
};

Residuals residuals(const Problem& p, const Eigen::VectorXd& x);

/// max_i |h_i(x)| <= tol and max_j g_j(x) <= tol.
bool is_feasible(const Problem& p, const Eigen::VectorXd& x, double tol);

/// max(0, max_i |h_i|, max_j g_j): how far x is outside S.
double infeasibility(const Residuals& r);

Jacobians jacobians(const Problem& p, const Eigen::VectorXd& x);

inline constexpr double kDefaultActivityTol = 1e-9;

/// Linear independence of the equality gradients and the gradients of the
/// inequalities with g_j(x) >= -activity_tol. Rank is decided from singular
/// values: smallest > 1e-8 * largest.
bool check_licq(const Problem& p, const Eigen::VectorXd& x,
                double activity_tol = kDefaultActivityTol);

/// Problem with the last n2 variables expressed through the first n1:
/// x = (xi, phi(xi)), with h(xi, phi(xi)) == 0 identically.
class ReducedProblem {
 public:
  const Problem& parent() const { return parent_; }
  std::size_t n1() const { return parent_.n() - phi_.size(); }
  std::size_t n2() const { return phi_.size(); }
  const std::vector<Expr>& elimination() const { return phi_; }

  /// (xi, phi(xi)).
  Eigen::VectorXd lift(const Eigen::VectorXd& xi) const;

  double objective(const Eigen::VectorXd& xi) const;
  Eigen::VectorXd inequalities(const Eigen::VectorXd& xi) const;

  /// Gradient of theta(xi, phi(xi)) by forward mode through the composition.
  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& xi) const;

  /// k x n1 Jacobian of g(xi, phi(xi)).
  Eigen::MatrixXd inequality_jacobian(const Eigen::VectorXd& xi) const;

  /// Jacobian of the lift, n x n1: [I; D phi].
  Eigen::MatrixXd lift_jacobian(const Eigen::VectorXd& xi) const;

 private:
  friend ReducedProblem reduce(const Problem&, const std::vector<std::pair<std::string, std::string>>&);
  friend ReducedProblem reduce(const Problem&, std::vector<Expr>);

  ReducedProblem(Problem parent, std::vector<Expr> phi)
      : parent_(std::move(parent)), phi_(std::move(phi)) {}

  template <class T>
  std::vector<T> lift_generic(std::span<const T> xi) const;

  Problem parent_;
  std::vector<Expr> phi_;  // each over the parent's n variables, using only the first n1
};

/// Builds the reduced problem from elimination expressions for the last n2
/// variables, in declaration order. Each phi is parsed over the parent's
/// variable list and may only reference the first n1 variables. The identity
/// h(xi, phi(xi)) == 0 is sampled at 100 deterministic points with
/// |xi| <= 5; any |h_i| > 1e-8 throws ModelError.
ReducedProblem reduce(const Problem& p, std::vector<Expr> phi);

/// As above, with (variable, expression text) pairs.
ReducedProblem reduce(const Problem& p,
                      const std::vector<std::pair<std::string, std::string>>& elimination);

}  // namespace nlpflow
