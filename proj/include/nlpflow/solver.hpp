#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nlpflow/field.hpp"
#include "nlpflow/kkt.hpp"
#include "nlpflow/state_space.hpp"

namespace nlpflow {

enum class Algorithm { theorem31, remark35 };

/// How the initial curvature estimates K^(0) are floored.
///  zero:    K = max(0, estimate); K <= 0 selects the linear-model step.
///  epsilon: K = max(eps, estimate), the textbook form. Stalls at active
///           linear constraints, kept for comparison runs.
enum class CurvatureFloor { zero, epsilon };

inline constexpr double kAcceptFeasTol = 1e-10;
inline constexpr long kMaxCurvatureIncrements = 1'000'000;

struct SolveConfig {
  Algorithm algorithm = Algorithm::remark35;
  double r = 1.0;
  double epsilon = 1e-6;
  double armijo = 0.1;
  long max_iter = 1000;
  double stop_tol = 1e-9;
  int projection_max_inner = 100;
  std::uint64_t seed = 0;
  CurvatureFloor floor = CurvatureFloor::zero;

  /// Range checks per algorithm; throws ModelError.
  void validate() const;
};

/// stalled_critical: the r35 step formula returned 0 at an iterate that
/// passes the KKT test (tolerance 1e-6) but has |F| > stop_tol. This happens
/// at an active convex constraint with a tangential field, where the
/// quadratic model admits no positive step.
enum class Termination { converged, max_iter, field_failure, step_failure, stalled_critical };

const char* to_string(Termination t);
const char* to_string(Algorithm a);

struct IterateRecord {
  long iter = 0;
  Eigen::VectorXd z;  // state coordinates
  Eigen::VectorXd x;  // full point
  double theta = 0.0;
  double norm_F = 0.0;
  double dtheta_F = 0.0;
  double step = 0.0;  // accepted step from this iterate; 0 on the last record
  long backtracks = 0;
  bool proj_used = false;
  std::vector<std::size_t> index_set;  // Theorem 3.1 I(x); empty for remark35
};

struct SolveReport {
  Algorithm algorithm = Algorithm::remark35;
  std::vector<IterateRecord> history;  // x_0 ... x_final
  Termination termination = Termination::max_iter;
  std::string diagnostic;
  std::optional<KktReport> kkt;  // at the final iterate, when the field evaluates
  long licq_warnings = 0;
  std::uint64_t seed = 0;

  /// Number of accepted steps.
  long iterations() const { return history.empty() ? 0 : static_cast<long>(history.size()) - 1; }
  const IterateRecord& final() const { return history.back(); }
};

/// I(x): indices whose sampled maximum of g_j(z + sF) over s in [0, eps]
/// (9 points), inflated by eps^2 K/2 with K the largest sampled second
/// difference, exceeds -eps.
std::vector<std::size_t> active_index_set(const StateSpace& space, const Eigen::VectorXd& z,
                                          const Eigen::VectorXd& direction, double epsilon);

struct ProjectionResult {
  bool ok = false;
  Eigen::VectorXd y;
  int iterations = 0;
  /// |y - target| over the largest first-order distance estimate
  /// g_j(target)+/|grad g_j(target)|; 1 when target is already feasible.
  double quality = 1.0;
};

/// Alternating projection onto linearizations of the most violated constraint
/// in `indices` until max_{j in indices} g_j(y) <= 1e-10 or max_inner steps.
ProjectionResult project_inexact(const StateSpace& space, const Eigen::VectorXd& target,
                                 const std::vector<std::size_t>& indices, int max_inner);

struct CurvatureEstimates {
  Eigen::VectorXd raw_j;  // 2 r^-2 (g_j(z + rF) - g_j(z) - r grad g_j F)
  double raw_theta = 0.0;
  Eigen::VectorXd k_j;  // floored
  double k_theta = 0.0;
};

CurvatureEstimates curvature_estimates(const StateSpace& space, const FieldEval& fe,
                                       const Eigen::VectorXd& z, double r, double epsilon,
                                       CurvatureFloor floor = CurvatureFloor::zero);

/// Largest s <= r with g + s a + s^2 K / 2 <= 0 by the quadratic model, for
/// g <= 0. a is the rate grad g_j F, K the curvature bound.
double constraint_step(double g, double a, double K, double r);

SolveReport solve_theorem31(const StateSpace& space, const FieldParams& params, const SolveConfig& cfg,
                            const Eigen::VectorXd& z0);

SolveReport solve_remark35(const StateSpace& space, const FieldParams& params, const SolveConfig& cfg,
                           const Eigen::VectorXd& z0);

/// Dispatches on cfg.algorithm.
SolveReport solve(const StateSpace& space, const FieldParams& params, const SolveConfig& cfg,
                  const Eigen::VectorXd& z0);

struct DescentLedger {
  double weighted_sum = 0.0;  // sum_i s_i |grad theta F|_i
  double bound = 0.0;         // (theta_0 - theta_end) / armijo
  bool holds = false;
};

DescentLedger descent_ledger(const SolveReport& report, double armijo);

}  // namespace nlpflow
