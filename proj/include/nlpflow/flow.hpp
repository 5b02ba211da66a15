#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "nlpflow/field.hpp"
#include "nlpflow/state_space.hpp"

namespace nlpflow {

inline constexpr double kFlowDriftLimit = 0.01;

struct TrajectoryPoint {
  double t = 0.0;
  Eigen::VectorXd x;  // full point
  double theta = 0.0;
  double norm_F = 0.0;
  double max_g = 0.0;
  double max_abs_h = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  bool aborted = false;
  long abort_step = -1;  // index of the state that could not be recorded
  std::string diagnostic;
};

/// Explicit Euler for x' = F(x) in the coordinates of `space`:
/// z_{i+1} = z_i + step * F(z_i). Records steps + 1 points unless the state
/// drifts to max_g > 0.01 or the field cannot be evaluated, in which case the
/// trajectory ends early with `aborted` set.
/// Throws ModelError when z0 is not feasible to 1e-8 or step <= 0.
Trajectory euler_flow(const StateSpace& space, const FieldParams& params, const Eigen::VectorXd& z0,
                      double step, long steps);

/// Rectangle of starting points in two state coordinates (0-based), the other
/// coordinates held at `fixed`.
struct PhaseGrid {
  std::size_t i = 0;
  std::size_t j = 1;
  double lo_i = 0.0, hi_i = 1.0;
  double lo_j = 0.0, hi_j = 1.0;
  std::size_t count_i = 11;
  std::size_t count_j = 11;
  Eigen::VectorXd fixed;  // state dimension; empty means zeros
};

struct PhaseTrajectory {
  std::size_t id = 0;  // row-major grid index
  Eigen::VectorXd z0;
  Trajectory trajectory;
};

struct PhaseResult {
  std::vector<PhaseTrajectory> trajectories;
  std::vector<Eigen::VectorXd> skipped;  // infeasible grid points
};

std::vector<Eigen::VectorXd> grid_points(const StateSpace& space, const PhaseGrid& grid);

PhaseResult phase_grid(const StateSpace& space, const FieldParams& params, const PhaseGrid& grid,
                       double step, long steps);

}  // namespace nlpflow
