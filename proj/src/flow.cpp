#include "nlpflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nlpflow/log.hpp"

namespace nlpflow {

namespace {

double max_or_zero(const Eigen::VectorXd& v) { return v.size() > 0 ? v.maxCoeff() : 0.0; }

double max_abs_or_zero(const Eigen::VectorXd& v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Trajectory euler_flow(const StateSpace& space, const FieldParams& params, const Eigen::VectorXd& z0,
                      double step, long steps) {
  if (!(step > 0.0)) throw ModelError("flow step must be positive");
  if (steps < 0) throw ModelError("flow step count must be non-negative");
  const Problem& p = space.problem();
  params.check_dimensions(p.n(), p.k());
  if (!is_feasible(p, space.lift(z0), 1e-8)) {
    throw ModelError("flow start point is not feasible (tolerance 1e-8)");
  }

  Trajectory traj;
  traj.points.reserve(static_cast<std::size_t>(steps) + 1);
  Eigen::VectorXd z = z0;
  for (long i = 0; i <= steps; ++i) {
    const Eigen::VectorXd x = space.lift(z);
    TrajectoryPoint pt;
    pt.t = static_cast<double>(i) * step;
    pt.x = x;
    FieldEval fe;
    try {
      const Residuals res = residuals(p, x);
      pt.max_g = max_or_zero(res.g);
      pt.max_abs_h = max_abs_or_zero(res.h);
      if (pt.max_g > kFlowDriftLimit) {
        traj.aborted = true;
        traj.abort_step = i;
        traj.diagnostic = fmt::format("step {}: feasibility drift, max g = {:.3g} > {}", i, pt.max_g,
                                      kFlowDriftLimit);
        break;
      }
      pt.theta = p.objective().eval(x);
      fe = field_eval(p, params, x);
    } catch (const Error& e) {
      traj.aborted = true;
      traj.abort_step = i;
      traj.diagnostic = fmt::format("step {}: field evaluation failed: {}", i, e.what());
      break;
    }
    pt.norm_F = fe.norm_F();
    traj.points.push_back(std::move(pt));
    if (i < steps) z += step * space.restrict(fe.F);
  }
  if (traj.aborted) log::info("flow aborted: {}", traj.diagnostic);
  return traj;
}

std::vector<Eigen::VectorXd> grid_points(const StateSpace& space, const PhaseGrid& grid) {
  const std::size_t dim = space.dim();
  if (grid.i >= dim || grid.j >= dim || grid.i == grid.j) {
    throw ModelError(fmt::format("phase plane ({}, {}) invalid for state dimension {}", grid.i + 1,
                                 grid.j + 1, dim));
  }
  if (grid.count_i == 0 || grid.count_j == 0) throw ModelError("phase grid counts must be positive");
  Eigen::VectorXd base = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  if (grid.fixed.size() > 0) {
    if (static_cast<std::size_t>(grid.fixed.size()) != dim) {
      throw ModelError(fmt::format("phase fixed values need {} entries", dim));
    }
    base = grid.fixed;
  }
  auto coord = [](double lo, double hi, std::size_t count, std::size_t idx) {
    if (count == 1) return lo;
    return lo + (hi - lo) * static_cast<double>(idx) / static_cast<double>(count - 1);
  };
  std::vector<Eigen::VectorXd> points;
  points.reserve(grid.count_i * grid.count_j);
  for (std::size_t a = 0; a < grid.count_i; ++a) {
    for (std::size_t b = 0; b < grid.count_j; ++b) {
      Eigen::VectorXd z = base;
      z[static_cast<Eigen::Index>(grid.i)] = coord(grid.lo_i, grid.hi_i, grid.count_i, a);
      z[static_cast<Eigen::Index>(grid.j)] = coord(grid.lo_j, grid.hi_j, grid.count_j, b);
      points.push_back(std::move(z));
    }
  }
  return points;
}

PhaseResult phase_grid(const StateSpace& space, const FieldParams& params, const PhaseGrid& grid,
                       double step, long steps) {
  PhaseResult result;
  const std::vector<Eigen::VectorXd> points = grid_points(space, grid);
  for (std::size_t id = 0; id < points.size(); ++id) {
    const Eigen::VectorXd& z0 = points[id];
    if (!is_feasible(space.problem(), space.lift(z0), 1e-8)) {
      result.skipped.push_back(z0);
      continue;
    }
    result.trajectories.push_back({id, z0, euler_flow(space, params, z0, step, steps)});
  }
  log::info("phase grid: {} trajectories, {} infeasible points skipped", result.trajectories.size(),
            result.skipped.size());
  return result;
}

}  // namespace nlpflow
