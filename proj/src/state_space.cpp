#include "nlpflow/state_space.hpp"

#include <fmt/format.h>

namespace nlpflow {

Eigen::VectorXd StateSpace::lift(const Eigen::VectorXd& z) const {
  if (reduced_) return reduced_->lift(z);
  if (static_cast<std::size_t>(z.size()) != problem_.n()) {
    throw ModelError(fmt::format("state has dimension {}, expected {}", z.size(), problem_.n()));
  }
  return z;
}

double StateSpace::objective(const Eigen::VectorXd& z) const {
  return problem_.objective().eval(lift(z));
}

Eigen::VectorXd StateSpace::inequalities(const Eigen::VectorXd& z) const {
  return residuals(problem_, lift(z)).g;
}

Eigen::MatrixXd StateSpace::inequality_jacobian(const Eigen::VectorXd& z) const {
  if (reduced_) return reduced_->inequality_jacobian(z);
  return jacobians(problem_, lift(z)).B;
}

Eigen::VectorXd StateSpace::state_from(const Eigen::VectorXd& v, double tol) const {
  const auto size = static_cast<std::size_t>(v.size());
  if (size == dim()) return v;
  if (size == problem_.n() && reduced_) {
    const Eigen::VectorXd z = v.head(static_cast<Eigen::Index>(dim()));
    const Eigen::VectorXd lifted = lift(z);
    const double gap = (lifted - v).cwiseAbs().maxCoeff();
    if (!(gap <= tol)) {
      throw ModelError(fmt::format(
          "point is not on the elimination manifold: eliminated coordinates differ by {:.3g}", gap));
    }
    return z;
  }
  throw ModelError(fmt::format("point has {} coordinates, expected {}{}", size, dim(),
                               reduced_ ? fmt::format(" or {}", problem_.n()) : std::string()));
}

}  // namespace nlpflow
