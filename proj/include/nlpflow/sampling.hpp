#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "nlpflow/state_space.hpp"

namespace nlpflow {

/// Rejection sampling of feasible states, uniform in [-box, box]^dim of the
/// state coordinates. Deterministic in `seed`. Throws ModelError if fewer
/// than `count` points are found within 10^6 * count draws.
std::vector<Eigen::VectorXd> sample_feasible(const StateSpace& space, std::size_t count, std::uint64_t seed,
                                             double box = 3.0);

}  // namespace nlpflow
