#pragma once

#include <vector>

#include <Eigen/Core>

#include "nlpflow/problem.hpp"

namespace nlpflow {

/// Free design data of the stabilizing field. Constant in x.
struct FieldParams {
  Eigen::MatrixXd r1;    // n x n, symmetric positive definite
  Eigen::MatrixXd r2;    // k x k, symmetric positive semidefinite
  Eigen::VectorXd a;     // k, >= 0
  Eigen::VectorXd b;     // k, >= 0
  Eigen::VectorXd c;     // k, >= 0, b + c > 0
  std::vector<int> p;    // k, >= 1

  /// R1 = sigma I, R2 = 0, a = b = 1, c = 0, p = 1.
  static FieldParams standard(std::size_t n, std::size_t k, double sigma = 1.0);

  /// Throws ModelError if dimensions or the definiteness/sign conditions fail.
  void validate(std::size_t n, std::size_t k) const;

  /// Shape checks only.
  void check_dimensions(std::size_t n, std::size_t k) const;
};

/// Everything the field computes at one point.
struct FieldEval {
  Eigen::VectorXd x;
  Eigen::VectorXd grad_theta;  // n
  Eigen::VectorXd h;           // m
  Eigen::VectorXd g;           // k
  Eigen::MatrixXd A;           // m x n
  Eigen::MatrixXd B;           // k x n
  Eigen::MatrixXd H;           // n x n
  Eigen::MatrixXd Q;           // k x k
  Eigen::MatrixXd P;           // k x n, Q^-1 B H
  Eigen::VectorXd v;           // k, P grad_theta'
  Eigen::VectorXd vplus;       // k
  Eigen::VectorXd r3;          // k, diagonal of R3
  Eigen::VectorXd F;           // n
  Eigen::VectorXd w;           // k
  Eigen::VectorXd omega;       // k
  Eigen::VectorXd BF;          // k, B F: the rates of the g_j along the flow
  double dtheta_F = 0.0;       // grad_theta . F, by direct product
  double dissipation = 0.0;    // the same rate from the closed-form sum of squares
  double infeasibility = 0.0;  // max(0, max|h|, max g); the field is only meaningful near 0
  FieldParams params;

  double norm_F() const { return F.norm(); }
};

/// I - A'(AA')^-1 A via a Cholesky solve; the identity when A has no rows.
/// Throws FactorizationError when A A' is not positive definite.
Eigen::MatrixXd projector_h(const Eigen::MatrixXd& A);

/// B H B' - diag(g). Throws FactorizationError (with the failing pivot) when
/// the result is not positive definite.
Eigen::MatrixXd q_matrix(const Eigen::MatrixXd& H, const Eigen::MatrixXd& B,
                         const Eigen::VectorXd& g);

/// Evaluates the field and its auxiliaries at x. Checks parameter shapes
/// only (call FieldParams::validate once up front). Does not require x to be
/// feasible; `infeasibility` records the distance from S in residual terms.
FieldEval field_eval(const Problem& p, const FieldParams& params, const Eigen::VectorXd& x);

/// -xi R1 xi' - (diag(g)v)'R2(diag(g)v) - sum a_j|g_j|v_j^2 - sum b_j (v_j+)^2
///  - sum c_j (v_j+)^(2p_j+2), with xi = grad_theta (H - P'QP). Non-positive;
/// equals grad_theta . F on S.
double dissipation(const FieldEval& fe);

}  // namespace nlpflow
