#pragma once

#include <Eigen/Core>

#include "nlpflow/field.hpp"
#include "nlpflow/problem.hpp"

namespace nlpflow {

inline constexpr double kDefaultKktTol = 1e-6;

struct Multipliers {
  Eigen::VectorXd lambda;  // m, equalities
  Eigen::VectorXd mu;      // k, inequalities
};

struct KktReport {
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  double stationarity_residual = 0.0;     // |grad theta' + A'lambda + B'mu|
  double complementarity_residual = 0.0;  // |mu'g|
  double mu_negativity = 0.0;             // |min(0, min_j mu_j)|
  bool is_critical = false;

  double worst() const;
};

/// mu = (-v)+ and lambda the least-squares solution of
/// A'lambda = -(grad theta' + B'mu). At a critical point v <= 0, so this is
/// mu = -v exactly; off the critical set the clip keeps mu a valid estimate.
Multipliers multipliers(const Problem& p, const Eigen::VectorXd& x, const FieldEval& fe);

KktReport kkt_residual(const Problem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                       const Eigen::VectorXd& mu, double tol = kDefaultKktTol);

/// multipliers() followed by kkt_residual().
KktReport kkt_report(const Problem& p, const FieldEval& fe, double tol = kDefaultKktTol);

/// |F(x)| <= tol at a feasible x (feasibility tolerance 1e-8).
bool is_critical(const Problem& p, const FieldParams& params, const Eigen::VectorXd& x,
                 double tol = kDefaultKktTol);

}  // namespace nlpflow
