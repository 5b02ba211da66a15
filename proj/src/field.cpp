#include "nlpflow/field.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "nlpflow/cholesky.hpp"

namespace nlpflow {

namespace {

bool is_symmetric(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return true;
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

double ipow(double base, int exponent) {
  double result = 1.0;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

}  // namespace

FieldParams FieldParams::standard(std::size_t n, std::size_t k, double sigma) {
  const auto nn = static_cast<Eigen::Index>(n);
  const auto kk = static_cast<Eigen::Index>(k);
  FieldParams params;
  params.r1 = sigma * Eigen::MatrixXd::Identity(nn, nn);
  params.r2 = Eigen::MatrixXd::Zero(kk, kk);
  params.a = Eigen::VectorXd::Ones(kk);
  params.b = Eigen::VectorXd::Ones(kk);
  params.c = Eigen::VectorXd::Zero(kk);
  params.p.assign(k, 1);
  return params;
}

void FieldParams::check_dimensions(std::size_t n, std::size_t k) const {
  const auto nn = static_cast<Eigen::Index>(n);
  const auto kk = static_cast<Eigen::Index>(k);
  if (r1.rows() != nn || r1.cols() != nn) throw ModelError(fmt::format("R1 must be {}x{}", n, n));
  if (r2.rows() != kk || r2.cols() != kk) throw ModelError(fmt::format("R2 must be {}x{}", k, k));
  if (a.size() != kk || b.size() != kk || c.size() != kk || p.size() != k) {
    throw ModelError(fmt::format("a, b, c, p must have {} entries", k));
  }
}

void FieldParams::validate(std::size_t n, std::size_t k) const {
  check_dimensions(n, k);
  const auto kk = static_cast<Eigen::Index>(k);
  if (!is_symmetric(r1)) throw ModelError("R1 must be symmetric");
  try {
    Cholesky check(r1, "R1");
  } catch (const FactorizationError&) {
    throw ModelError("R1 must be positive definite");
  }
  if (!is_symmetric(r2)) throw ModelError("R2 must be symmetric");
  bool r2_definite = false;
  if (kk > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r2, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double scale = 1.0 + r2.cwiseAbs().maxCoeff();
    if (lo < -1e-12 * scale) throw ModelError("R2 must be positive semidefinite");
    r2_definite = lo > 1e-12 * scale;
  }
  bool a_definite = true;
  for (Eigen::Index j = 0; j < kk; ++j) {
    if (!(a[j] >= 0.0 && b[j] >= 0.0 && c[j] >= 0.0)) throw ModelError("a, b, c must be non-negative");
    if (!(b[j] + c[j] > 0.0)) throw ModelError(fmt::format("b_{0} + c_{0} must be positive", j + 1));
    if (p[static_cast<std::size_t>(j)] < 1) throw ModelError("p_j must be integers >= 1");
    if (!(a[j] > 0.0)) a_definite = false;
  }
  if (kk > 0 && !r2_definite && !a_definite) {
    throw ModelError("need R2 positive definite or every a_j > 0");
  }
}

Eigen::MatrixXd projector_h(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.cols();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  if (A.rows() == 0) return H;
  const Cholesky gram(A * A.transpose(), "A A' (equality gradients dependent)");
  H -= A.transpose() * gram.solve(Eigen::MatrixXd(A));
  return H;
}

Eigen::MatrixXd q_matrix(const Eigen::MatrixXd& H, const Eigen::MatrixXd& B, const Eigen::VectorXd& g) {
  if (B.rows() != g.size() || B.cols() != H.rows()) throw ModelError("q_matrix: dimension mismatch");
  Eigen::MatrixXd Q = B * H * B.transpose();
  Q.diagonal() -= g;
  Cholesky check(Q, "Q = B H B' - diag(g)");
  return Q;
}

FieldEval field_eval(const Problem& p, const FieldParams& params, const Eigen::VectorXd& x) {
  params.check_dimensions(p.n(), p.k());
  FieldEval fe;
  fe.x = x;
  const Residuals res = residuals(p, x);
  const Jacobians jac = jacobians(p, x);
  fe.h = res.h;
  fe.g = res.g;
  fe.A = jac.A;
  fe.B = jac.B;
  fe.infeasibility = infeasibility(res);
  fe.grad_theta = p.objective().grad(x);
  fe.params = params;

  const auto k = static_cast<Eigen::Index>(p.k());
  fe.H = projector_h(fe.A);
  const Eigen::MatrixXd BH = fe.B * fe.H;
  fe.Q = BH * fe.B.transpose();
  fe.Q.diagonal() -= fe.g;
  const Cholesky qf(fe.Q, "Q = B H B' - diag(g)");

  fe.P = qf.solve(BH);
  fe.v = fe.P * fe.grad_theta;
  fe.vplus = fe.v.cwiseMax(0.0);
  fe.r3.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    fe.r3[j] = params.b[j] + params.c[j] * ipow(fe.vplus[j], 2 * params.p[static_cast<std::size_t>(j)]);
  }

  const Eigen::MatrixXd M = fe.H - fe.P.transpose() * fe.Q * fe.P;
  const Eigen::VectorXd m_grad = M * fe.grad_theta;
  const Eigen::VectorXd r1_m_grad = params.r1 * m_grad;
  const Eigen::MatrixXd D = params.r2 * fe.g.asDiagonal() - Eigen::MatrixXd(params.a.asDiagonal());
  const Eigen::VectorXd Dv = D * fe.v;
  const Eigen::VectorXd r3_vplus = fe.r3.cwiseProduct(fe.vplus);

  fe.F = -M * r1_m_grad - fe.P.transpose() * fe.g.cwiseProduct(Dv) - fe.P.transpose() * r3_vplus;

  const Eigen::VectorXd bh_r1_m_grad = BH * r1_m_grad;
  Eigen::MatrixXd q_plus_g = fe.Q;
  q_plus_g.diagonal() += fe.g;
  fe.w = bh_r1_m_grad - q_plus_g * Dv - r3_vplus;
  fe.omega = qf.solve(bh_r1_m_grad) - Dv - qf.solve(Eigen::VectorXd(fe.g.cwiseProduct(Dv))) - qf.solve(r3_vplus);

  fe.BF = fe.B * fe.F;
  fe.dtheta_F = fe.grad_theta.dot(fe.F);
  fe.dissipation = dissipation(fe);
  return fe;
}

double dissipation(const FieldEval& fe) {
  const FieldParams& prm = fe.params;
  const Eigen::VectorXd xi = fe.H * fe.grad_theta - fe.P.transpose() * (fe.Q * (fe.P * fe.grad_theta));
  double rate = -xi.dot(prm.r1 * xi);
  const Eigen::VectorXd gv = fe.g.cwiseProduct(fe.v);
  rate -= gv.dot(prm.r2 * gv);
  for (Eigen::Index j = 0; j < fe.v.size(); ++j) {
    const double vp = fe.vplus[j];
    rate -= prm.a[j] * std::abs(fe.g[j]) * fe.v[j] * fe.v[j];
    rate -= prm.b[j] * vp * vp;
    rate -= prm.c[j] * ipow(vp, 2 * prm.p[static_cast<std::size_t>(j)] + 2);
  }
  return rate;
}

}  // namespace nlpflow
