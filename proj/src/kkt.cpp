#include "nlpflow/kkt.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nlpflow/cholesky.hpp"

namespace nlpflow {

double KktReport::worst() const {
  return std::max({stationarity_residual, complementarity_residual, mu_negativity});
}

Multipliers multipliers(const Problem& p, const Eigen::VectorXd& /*x*/, const FieldEval& fe) {
  Multipliers out;
  out.mu = (-fe.v).cwiseMax(0.0);
  const Eigen::VectorXd rhs = -(fe.grad_theta + fe.B.transpose() * out.mu);
  if (p.m() == 0) {
    out.lambda.resize(0);
    return out;
  }
  // Normal equations (A A') lambda = A rhs; A has full row rank under LICQ.
  const Cholesky gram(fe.A * fe.A.transpose(), "A A' (equality gradients dependent)");
  out.lambda = gram.solve(Eigen::VectorXd(fe.A * rhs));
  return out;
}

KktReport kkt_residual(const Problem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                       const Eigen::VectorXd& mu, double tol) {
  if (static_cast<std::size_t>(lambda.size()) != p.m() || static_cast<std::size_t>(mu.size()) != p.k()) {
    throw ModelError(fmt::format("multiplier sizes ({}, {}) do not match (m, k) = ({}, {})",
                                 lambda.size(), mu.size(), p.m(), p.k()));
  }
  const Jacobians jac = jacobians(p, x);
  const Residuals res = residuals(p, x);
  KktReport report;
  report.lambda = lambda;
  report.mu = mu;
  const Eigen::VectorXd stationarity =
      p.objective().grad(x) + jac.A.transpose() * lambda + jac.B.transpose() * mu;
  report.stationarity_residual = stationarity.norm();
  report.complementarity_residual = std::abs(mu.dot(res.g));
  report.mu_negativity = mu.size() > 0 ? std::abs(std::min(0.0, mu.minCoeff())) : 0.0;
  const bool mu_ok = mu.size() == 0 || mu.minCoeff() >= -tol;
  report.is_critical = report.stationarity_residual <= tol && report.complementarity_residual <= tol &&
                       report.mu_negativity <= tol && mu_ok;
  return report;
}

KktReport kkt_report(const Problem& p, const FieldEval& fe, double tol) {
  const Multipliers mult = multipliers(p, fe.x, fe);
  return kkt_residual(p, fe.x, mult.lambda, mult.mu, tol);
}

bool is_critical(const Problem& p, const FieldParams& params, const Eigen::VectorXd& x, double tol) {
  if (!is_feasible(p, x, 1e-8)) {
    throw ModelError("is_critical needs a feasible point (tolerance 1e-8)");
  }
  return field_eval(p, params, x).norm_F() <= tol;
}

}  // namespace nlpflow
