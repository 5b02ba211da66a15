#include "nlpflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "nlpflow/log.hpp"

namespace nlpflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRateNoise = 64.0 * std::numeric_limits<double>::epsilon();

double max_or_minus_inf(const Eigen::VectorXd& v) { return v.size() > 0 ? v.maxCoeff() : -kInf; }

void prepare(const StateSpace& space, const FieldParams& params, const SolveConfig& cfg,
             const Eigen::VectorXd& z0) {
  cfg.validate();
  if (space.free_equalities() > 0) {
    throw ModelError(
        "the solvers need h == 0 identically: give an elimination for the equality constraints");
  }
  const Problem& p = space.problem();
  params.validate(p.n(), p.k());
  if (static_cast<std::size_t>(z0.size()) != space.dim()) {
    throw ModelError(fmt::format("start point has {} coordinates, expected {}", z0.size(), space.dim()));
  }
  if (!is_feasible(p, space.lift(z0), 1e-8)) {
    throw ModelError("start point is not feasible (tolerance 1e-8)");
  }
}

// Evaluates the iterate; returns false (and fills the report) on field failure.
bool evaluate(const StateSpace& space, const FieldParams& params, const Eigen::VectorXd& z, long iter,
              IterateRecord& rec, FieldEval& fe, SolveReport& report) {
  const Problem& p = space.problem();
  rec.iter = iter;
  rec.z = z;
  rec.x = space.lift(z);
  rec.theta = p.objective().eval(rec.x);
  try {
    fe = field_eval(p, params, rec.x);
  } catch (const Error& e) {
    rec.norm_F = std::numeric_limits<double>::quiet_NaN();
    rec.dtheta_F = std::numeric_limits<double>::quiet_NaN();
    report.history.push_back(rec);
    report.termination = Termination::field_failure;
    report.diagnostic = fmt::format("iteration {}: {}", iter, e.what());
    return false;
  }
  rec.norm_F = fe.norm_F();
  rec.dtheta_F = fe.dtheta_F;
  if (!check_licq(p, rec.x)) {
    ++report.licq_warnings;
    log::info("iteration {}: active constraint gradients are linearly dependent", iter);
  }
  return true;
}

// Handles the stopping tests shared by both algorithms. True means stop.
bool finished(const SolveConfig& cfg, long iter, const IterateRecord& rec, const FieldEval& fe,
              const Problem& p, SolveReport& report) {
  if (rec.norm_F <= cfg.stop_tol) {
    report.termination = Termination::converged;
  } else if (iter >= cfg.max_iter) {
    report.termination = Termination::max_iter;
    report.diagnostic = fmt::format("|F| = {:.3g} after {} iterations", rec.norm_F, iter);
  } else {
    return false;
  }
  report.history.push_back(rec);
  report.kkt = kkt_report(p, fe);
  return true;
}

bool accepts(const StateSpace& space, const Eigen::VectorXd& y, double theta, double rate, double s,
             double armijo) {
  try {
    if (max_or_minus_inf(space.inequalities(y)) > kAcceptFeasTol) return false;
    return space.objective(y) <= theta + armijo * s * rate;
  } catch (const EvalError&) {
    return false;
  }
}

}  // namespace

void SolveConfig::validate() const {
  if (!(r > 0.0)) throw ModelError("r must be positive");
  if (!(epsilon > 0.0)) throw ModelError("epsilon must be positive");
  if (algorithm == Algorithm::theorem31) {
    if (!(epsilon < r)) throw ModelError("theorem31 needs epsilon < r");
    if (!(armijo > 0.0 && armijo < 1.0)) throw ModelError("theorem31 needs armijo in (0, 1)");
  } else {
    if (!(armijo > 0.0 && armijo <= 0.5)) throw ModelError("remark35 needs armijo in (0, 1/2]");
  }
  if (max_iter < 1) throw ModelError("max_iter must be at least 1");
  if (!(stop_tol >= 0.0)) throw ModelError("stop_tol must be non-negative");
  if (projection_max_inner < 1) throw ModelError("projection_max_inner must be at least 1");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iter: return "max_iter";
    case Termination::field_failure: return "field_failure";
    case Termination::step_failure: return "step_failure";
    case Termination::stalled_critical: return "stalled_critical";
  }
  return "unknown";
}

const char* to_string(Algorithm a) { return a == Algorithm::theorem31 ? "t31" : "r35"; }

std::vector<std::size_t> active_index_set(const StateSpace& space, const Eigen::VectorXd& z,
                                          const Eigen::VectorXd& direction, double epsilon) {
  constexpr int kSamples = 9;
  const auto k = static_cast<Eigen::Index>(space.problem().k());
  const double h = epsilon / (kSamples - 1);
  Eigen::MatrixXd vals(kSamples, k);
  for (int i = 0; i < kSamples; ++i) {
    vals.row(i) = space.inequalities(z + (h * i) * direction).transpose();
  }
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < k; ++j) {
    double curv = 0.0;
    for (int i = 1; i + 1 < kSamples; ++i) {
      curv = std::max(curv, (vals(i - 1, j) - 2.0 * vals(i, j) + vals(i + 1, j)) / (h * h));
    }
    const double top = vals.col(j).maxCoeff() + 0.5 * epsilon * epsilon * curv;
    if (top > -epsilon) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

ProjectionResult project_inexact(const StateSpace& space, const Eigen::VectorXd& target,
                                 const std::vector<std::size_t>& indices, int max_inner) {
  ProjectionResult res;
  res.y = target;
  if (indices.empty()) {
    res.ok = true;
    return res;
  }
  const Eigen::VectorXd g0 = space.inequalities(target);
  const Eigen::MatrixXd B0 = space.inequality_jacobian(target);
  double lower = 0.0;
  for (std::size_t j : indices) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double gn = B0.row(jj).norm();
    if (g0[jj] > 0.0 && gn > 0.0) lower = std::max(lower, g0[jj] / gn);
  }

  Eigen::VectorXd y = target;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd g = space.inequalities(y);
    std::size_t worst = indices.front();
    for (std::size_t j : indices) {
      if (g[static_cast<Eigen::Index>(j)] > g[static_cast<Eigen::Index>(worst)]) worst = j;
    }
    const auto w = static_cast<Eigen::Index>(worst);
    if (g[w] <= kAcceptFeasTol) {
      res.ok = true;
      res.iterations = it;
      break;
    }
    if (it >= max_inner) {
      res.iterations = it;
      return res;
    }
    const Eigen::VectorXd grad = space.inequality_jacobian(y).row(w).transpose();
    const double gg = grad.squaredNorm();
    if (!(gg > 0.0)) {
      res.iterations = it;
      return res;
    }
    // Aim a hair inside the linearized boundary.
    y -= ((g[w] + 1e-12) / gg) * grad;
  }
  res.y = y;
  const double dist = (y - target).norm();
  res.quality = lower > 0.0 ? dist / lower : 1.0;
  return res;
}

CurvatureEstimates curvature_estimates(const StateSpace& space, const FieldEval& fe,
                                       const Eigen::VectorXd& z, double r, double epsilon,
                                       CurvatureFloor floor) {
  const Eigen::VectorXd d = space.restrict(fe.F);
  const Eigen::VectorXd zr = z + r * d;
  const double scale = 2.0 / (r * r);
  CurvatureEstimates est;
  est.raw_j = scale * (space.inequalities(zr) - fe.g - r * fe.BF);
  est.raw_theta = scale * (space.objective(zr) - space.objective(z) - r * fe.dtheta_F);
  const double lo = floor == CurvatureFloor::epsilon ? epsilon : 0.0;
  est.k_j = est.raw_j.cwiseMax(lo);
  est.k_theta = std::max(lo, est.raw_theta);
  return est;
}

double constraint_step(double g, double a, double K, double r) {
  double s;
  if (K > 0.0) {
    const double disc = std::sqrt(std::max(0.0, a * a - 2.0 * K * g));
    s = a > 0.0 ? -2.0 * g / (a + disc) : (-a + disc) / K;
  } else {
    s = a > 0.0 ? -g / a : kInf;
  }
  return std::min(r, std::max(0.0, s));
}

SolveReport solve_theorem31(const StateSpace& space, const FieldParams& params, const SolveConfig& cfg,
                            const Eigen::VectorXd& z0) {
  prepare(space, params, cfg, z0);
  const Problem& p = space.problem();
  SolveReport report;
  report.algorithm = Algorithm::theorem31;
  report.seed = cfg.seed;
  Eigen::VectorXd z = z0;
  for (long iter = 0;; ++iter) {
    IterateRecord rec;
    FieldEval fe;
    if (!evaluate(space, params, z, iter, rec, fe, report)) break;
    if (finished(cfg, iter, rec, fe, p, report)) break;

    const Eigen::VectorXd d = space.restrict(fe.F);
    rec.index_set = active_index_set(space, z, d, cfg.epsilon);
    rec.proj_used = !rec.index_set.empty();
    double s = cfg.r;
    long backtracks = 0;
    Eigen::VectorXd next;
    bool accepted = false;
    while (s >= 1e-14 * cfg.r) {
      const Eigen::VectorXd candidate = z + s * d;
      if (rec.index_set.empty()) {
        if (accepts(space, candidate, rec.theta, rec.dtheta_F, s, cfg.armijo)) {
          next = candidate;
          accepted = true;
          break;
        }
      } else {
        const ProjectionResult pr = project_inexact(space, candidate, rec.index_set, cfg.projection_max_inner);
        if (pr.ok && accepts(space, pr.y, rec.theta, rec.dtheta_F, s, cfg.armijo)) {
          log::trace("iteration {}: projection took {} steps, quality {:.3g}", iter, pr.iterations, pr.quality);
          next = pr.y;
          accepted = true;
          break;
        }
      }
      s *= 0.5;
      ++backtracks;
    }
    if (!accepted) {
      report.history.push_back(rec);
      report.termination = Termination::step_failure;
      report.diagnostic = fmt::format("iteration {}: step fell below 1e-14 r after {} halvings", iter, backtracks);
      report.kkt = kkt_report(p, fe);
      break;
    }
    rec.step = s;
    rec.backtracks = backtracks;
    log::trace("t31 iter {} theta {:.17g} |F| {:.3g} s {:.3g} p {} |I| {}", iter, rec.theta, rec.norm_F, s,
               backtracks, rec.index_set.size());
    report.history.push_back(std::move(rec));
    z = std::move(next);
  }
  log::info("t31: {} after {} iterations", to_string(report.termination), report.iterations());
  return report;
}

SolveReport solve_remark35(const StateSpace& space, const FieldParams& params, const SolveConfig& cfg,
                           const Eigen::VectorXd& z0) {
  prepare(space, params, cfg, z0);
  const Problem& p = space.problem();
  const auto k = static_cast<Eigen::Index>(p.k());
  SolveReport report;
  report.algorithm = Algorithm::remark35;
  report.seed = cfg.seed;
  Eigen::VectorXd z = z0;
  for (long iter = 0;; ++iter) {
    IterateRecord rec;
    FieldEval fe;
    if (!evaluate(space, params, z, iter, rec, fe, report)) break;
    if (finished(cfg, iter, rec, fe, p, report)) break;

    const Eigen::VectorXd d = space.restrict(fe.F);
    const CurvatureEstimates est = curvature_estimates(space, fe, z, cfg.r, cfg.epsilon, cfg.floor);
    Eigen::VectorXd K = est.k_j;
    double k_theta = est.k_theta;

    // Rates and values at rounding level are treated as exact zeros.
    Eigen::VectorXd rate(k), gval(k);
    // F is a sum of terms of size ~|grad theta| that cancel near Phi.
    const double f_scale = fe.norm_F() + fe.grad_theta.norm();
    for (Eigen::Index j = 0; j < k; ++j) {
      const double noise = kRateNoise * fe.B.row(j).norm() * f_scale;
      rate[j] = std::abs(fe.BF[j]) <= noise ? 0.0 : fe.BF[j];
      gval[j] = std::min(fe.g[j], 0.0);
    }
    const double descent = std::abs(rec.dtheta_F);

    long increments = 0;
    double s = 0.0;
    Eigen::VectorXd next;
    bool accepted = false;
    std::string blocker;
    bool collapsed = false;
    for (;;) {
      s = cfg.r;
      for (Eigen::Index j = 0; j < k; ++j) s = std::min(s, constraint_step(gval[j], rate[j], K[j], cfg.r));
      if (k_theta > 0.0) s = std::min(s, descent / k_theta);
      if (!(s > 0.0)) {
        blocker = "step collapse: the step formula returned 0";
        collapsed = true;
        break;
      }
      const Eigen::VectorXd candidate = z + s * d;
      if (accepts(space, candidate, rec.theta, rec.dtheta_F, s, cfg.armijo)) {
        next = candidate;
        accepted = true;
        break;
      }
      if (increments >= kMaxCurvatureIncrements) {
        const Eigen::VectorXd gc = space.inequalities(candidate);
        Eigen::Index worst = 0;
        if (k > 0 && gc.maxCoeff(&worst) > kAcceptFeasTol) {
          blocker = fmt::format("curvature increment cap reached, constraint g{} violated by {:.3g}", worst + 1,
                                gc[worst]);
        } else {
          blocker = "curvature increment cap reached, Armijo condition fails";
        }
        break;
      }
      K.array() += cfg.epsilon;
      k_theta += cfg.epsilon;
      ++increments;
    }
    if (!accepted) {
      report.history.push_back(rec);
      report.kkt = kkt_report(p, fe);
      report.termination = collapsed && report.kkt->is_critical ? Termination::stalled_critical
                                                                 : Termination::step_failure;
      report.diagnostic = fmt::format("iteration {}: {} (|F| = {:.3g})", iter, blocker, rec.norm_F);
      break;
    }
    rec.step = s;
    rec.backtracks = increments;
    log::trace("r35 iter {} theta {:.17g} |F| {:.3g} s {:.3g} p {}", iter, rec.theta, rec.norm_F, s, increments);
    report.history.push_back(std::move(rec));
    z = std::move(next);
  }
  log::info("r35: {} after {} iterations", to_string(report.termination), report.iterations());
  return report;
}

SolveReport solve(const StateSpace& space, const FieldParams& params, const SolveConfig& cfg,
                  const Eigen::VectorXd& z0) {
  return cfg.algorithm == Algorithm::theorem31 ? solve_theorem31(space, params, cfg, z0)
                                               : solve_remark35(space, params, cfg, z0);
}

DescentLedger descent_ledger(const SolveReport& report, double armijo) {
  DescentLedger ledger;
  if (report.history.empty()) return ledger;
  for (std::size_t i = 0; i + 1 < report.history.size(); ++i) {
    const IterateRecord& rec = report.history[i];
    ledger.weighted_sum += rec.step * std::abs(rec.dtheta_F);
  }
  ledger.bound = (report.history.front().theta - report.history.back().theta) / armijo;
  ledger.holds = ledger.weighted_sum <= ledger.bound;
  return ledger;
}

}  // namespace nlpflow
