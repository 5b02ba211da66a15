#include "nlpflow/sampling.hpp"

#include <random>

#include <fmt/format.h>

namespace nlpflow {

std::vector<Eigen::VectorXd> sample_feasible(const StateSpace& space, std::size_t count, std::uint64_t seed,
                                             double box) {
  if (!(box > 0.0)) throw ModelError("sampling box must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-box, box);
  const auto dim = static_cast<Eigen::Index>(space.dim());
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  const std::size_t budget = 1'000'000 * (count == 0 ? 1 : count);
  for (std::size_t draw = 0; out.size() < count; ++draw) {
    if (draw >= budget) {
      throw ModelError(fmt::format("found only {} of {} feasible points in [-{}, {}]^{}", out.size(), count, box,
                                   box, dim));
    }
    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = unif(rng);
    // g <= 0 exactly; equalities (unreduced problems) to 1e-8.
    const Eigen::VectorXd x = space.lift(z);
    const Residuals res = residuals(space.problem(), x);
    if (res.g.size() > 0 && res.g.maxCoeff() > 0.0) continue;
    if (res.h.size() > 0 && res.h.cwiseAbs().maxCoeff() > 1e-8) continue;
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace nlpflow
