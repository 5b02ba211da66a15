#include "nlpflow/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>
#include <fmt/format.h>

namespace nlpflow {

namespace {

void require_arity(const Expr& e, std::size_t n, const char* role) {
  if (e.arity() != n) {
    throw ModelError(fmt::format("{} is declared over {} variables, problem has {}", role, e.arity(), n));
  }
}

std::span<const double> as_span(const Eigen::VectorXd& x) {
  return {x.data(), static_cast<std::size_t>(x.size())};
}

void require_dim(const Eigen::VectorXd& x, std::size_t n) {
  if (static_cast<std::size_t>(x.size()) != n) {
    throw ModelError(fmt::format("point has dimension {}, expected {}", x.size(), n));
  }
}

}  // namespace

Problem::Problem(std::vector<std::string> names, Expr objective, std::vector<Expr> equalities,
                 std::vector<Expr> inequalities)
    : names_(std::move(names)),
      objective_(std::move(objective)),
      equalities_(std::move(equalities)),
      inequalities_(std::move(inequalities)) {
  if (names_.empty()) throw ModelError("problem needs at least one variable");
  if (m() >= n()) {
    throw ModelError(fmt::format("need fewer equalities than variables (m = {}, n = {})", m(), n()));
  }
  require_arity(objective_, n(), "objective");
  for (const auto& h : equalities_) require_arity(h, n(), "equality");
  for (const auto& g : inequalities_) require_arity(g, n(), "inequality");
  for (std::size_t i = 0; i < n(); ++i) {
    if (objective_.variables()[i] != names_[i]) {
      throw ModelError("objective variable list does not match the problem's");
    }
  }
}

Residuals residuals(const Problem& p, const Eigen::VectorXd& x) {
  require_dim(x, p.n());
  Residuals r{Eigen::VectorXd(static_cast<Eigen::Index>(p.m())),
              Eigen::VectorXd(static_cast<Eigen::Index>(p.k()))};
  for (std::size_t i = 0; i < p.m(); ++i) r.h[static_cast<Eigen::Index>(i)] = p.equalities()[i].eval(as_span(x));
  for (std::size_t j = 0; j < p.k(); ++j) r.g[static_cast<Eigen::Index>(j)] = p.inequalities()[j].eval(as_span(x));
  return r;
}

double infeasibility(const Residuals& r) {
  double worst = 0.0;
  if (r.h.size() > 0) worst = std::max(worst, r.h.cwiseAbs().maxCoeff());
  if (r.g.size() > 0) worst = std::max(worst, r.g.maxCoeff());
  return worst;
}

bool is_feasible(const Problem& p, const Eigen::VectorXd& x, double tol) {
  if (tol < 0.0) throw ModelError("feasibility tolerance must be non-negative");
  return infeasibility(residuals(p, x)) <= tol;
}

Jacobians jacobians(const Problem& p, const Eigen::VectorXd& x) {
  require_dim(x, p.n());
  const auto n = static_cast<Eigen::Index>(p.n());
  Jacobians J{Eigen::MatrixXd(static_cast<Eigen::Index>(p.m()), n),
              Eigen::MatrixXd(static_cast<Eigen::Index>(p.k()), n)};
  for (std::size_t i = 0; i < p.m(); ++i) J.A.row(static_cast<Eigen::Index>(i)) = p.equalities()[i].grad(as_span(x)).transpose();
  for (std::size_t j = 0; j < p.k(); ++j) J.B.row(static_cast<Eigen::Index>(j)) = p.inequalities()[j].grad(as_span(x)).transpose();
  return J;
}

bool check_licq(const Problem& p, const Eigen::VectorXd& x, double activity_tol) {
  const Residuals r = residuals(p, x);
  const Jacobians J = jacobians(p, x);
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < r.g.size(); ++j) {
    if (r.g[j] >= -activity_tol) active.push_back(j);
  }
  const Eigen::Index rows = J.A.rows() + static_cast<Eigen::Index>(active.size());
  if (rows == 0) return true;
  if (rows > static_cast<Eigen::Index>(p.n())) return false;

  Eigen::MatrixXd stacked(rows, static_cast<Eigen::Index>(p.n()));
  stacked.topRows(J.A.rows()) = J.A;
  for (std::size_t a = 0; a < active.size(); ++a) {
    stacked.row(J.A.rows() + static_cast<Eigen::Index>(a)) = J.B.row(active[a]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double largest = sv.maxCoeff();
  if (!(largest > 0.0)) return false;
  return sv.minCoeff() > 1e-8 * largest;
}

template <class T>
std::vector<T> ReducedProblem::lift_generic(std::span<const T> xi) const {
  const std::size_t n = parent_.n();
  const std::size_t first = n1();
  std::vector<T> x(n);
  for (std::size_t i = 0; i < first; ++i) x[i] = xi[i];
  // phi only reads the first n1 slots; the tail is filled as it is computed.
  for (std::size_t i = first; i < n; ++i) x[i] = T{0.0};
  for (std::size_t e = 0; e < phi_.size(); ++e) {
    x[first + e] = phi_[e].evaluate<T>(std::span<const T>(x));
  }
  return x;
}

Eigen::VectorXd ReducedProblem::lift(const Eigen::VectorXd& xi) const {
  require_dim(xi, n1());
  const auto x = lift_generic<double>(as_span(xi));
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

double ReducedProblem::objective(const Eigen::VectorXd& xi) const {
  return parent_.objective().eval(lift(xi));
}

Eigen::VectorXd ReducedProblem::inequalities(const Eigen::VectorXd& xi) const {
  return residuals(parent_, lift(xi)).g;
}

Eigen::VectorXd ReducedProblem::objective_gradient(const Eigen::VectorXd& xi) const {
  require_dim(xi, n1());
  const std::size_t d = n1();
  std::vector<Dual> seeded(d);
  for (std::size_t i = 0; i < d; ++i) seeded[i] = Dual(xi[static_cast<Eigen::Index>(i)]);
  Eigen::VectorXd grad(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    seeded[i].d = 1.0;
    const auto x = lift_generic<Dual>(std::span<const Dual>(seeded));
    grad[static_cast<Eigen::Index>(i)] = parent_.objective().evaluate<Dual>(std::span<const Dual>(x)).d;
    seeded[i].d = 0.0;
  }
  return grad;
}

Eigen::MatrixXd ReducedProblem::inequality_jacobian(const Eigen::VectorXd& xi) const {
  require_dim(xi, n1());
  const std::size_t d = n1();
  Eigen::MatrixXd J(static_cast<Eigen::Index>(parent_.k()), static_cast<Eigen::Index>(d));
  std::vector<Dual> seeded(d);
  for (std::size_t i = 0; i < d; ++i) seeded[i] = Dual(xi[static_cast<Eigen::Index>(i)]);
  for (std::size_t i = 0; i < d; ++i) {
    seeded[i].d = 1.0;
    const auto x = lift_generic<Dual>(std::span<const Dual>(seeded));
    for (std::size_t j = 0; j < parent_.k(); ++j) {
      J(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          parent_.inequalities()[j].evaluate<Dual>(std::span<const Dual>(x)).d;
    }
    seeded[i].d = 0.0;
  }
  return J;
}

Eigen::MatrixXd ReducedProblem::lift_jacobian(const Eigen::VectorXd& xi) const {
  require_dim(xi, n1());
  const std::size_t d = n1();
  Eigen::MatrixXd J(static_cast<Eigen::Index>(parent_.n()), static_cast<Eigen::Index>(d));
  std::vector<Dual> seeded(d);
  for (std::size_t i = 0; i < d; ++i) seeded[i] = Dual(xi[static_cast<Eigen::Index>(i)]);
  for (std::size_t i = 0; i < d; ++i) {
    seeded[i].d = 1.0;
    const auto x = lift_generic<Dual>(std::span<const Dual>(seeded));
    for (std::size_t r = 0; r < x.size(); ++r) {
      J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = x[r].d;
    }
    seeded[i].d = 0.0;
  }
  return J;
}

ReducedProblem reduce(const Problem& p, std::vector<Expr> phi) {
  if (phi.size() >= p.n()) {
    throw ModelError(fmt::format("cannot eliminate {} of {} variables", phi.size(), p.n()));
  }
  const std::size_t n1 = p.n() - phi.size();
  for (std::size_t e = 0; e < phi.size(); ++e) {
    if (phi[e].arity() != p.n()) {
      throw ModelError("elimination expressions must be declared over the problem's variables");
    }
    for (std::size_t v = n1; v < p.n(); ++v) {
      if (phi[e].depends_on(v)) {
        throw ModelError(fmt::format("elimination of '{}' references eliminated variable '{}'",
                                     p.names()[n1 + e], p.names()[v]));
      }
    }
  }
  ReducedProblem reduced(p, std::move(phi));

  // Deterministic sample of the ball |xi| <= 5.
  std::mt19937_64 rng(0x5eed5eedULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr double kRadius = 5.0;
  constexpr double kTol = 1e-8;
  for (int s = 0; s < 100; ++s) {
    Eigen::VectorXd xi(static_cast<Eigen::Index>(n1));
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = unit(rng);
    const double radius = kRadius * std::pow(std::abs(unit(rng)), 1.0 / static_cast<double>(n1));
    if (xi.norm() > 0.0) xi *= radius / xi.norm();
    const Residuals r = residuals(p, reduced.lift(xi));
    for (Eigen::Index i = 0; i < r.h.size(); ++i) {
      if (!(std::abs(r.h[i]) <= kTol)) {
        throw ModelError(fmt::format(
            "elimination does not satisfy equality {}: |h| = {:.3g} at sampled point {}", i + 1,
            std::abs(r.h[i]), s));
      }
    }
  }
  return reduced;
}

ReducedProblem reduce(const Problem& p,
                      const std::vector<std::pair<std::string, std::string>>& elimination) {
  const std::size_t n2 = elimination.size();
  if (n2 >= p.n()) {
    throw ModelError(fmt::format("cannot eliminate {} of {} variables", n2, p.n()));
  }
  const std::size_t n1 = p.n() - n2;
  std::vector<Expr> phi;
  phi.reserve(n2);
  for (std::size_t e = 0; e < n2; ++e) {
    const auto& [name, text] = elimination[e];
    if (name != p.names()[n1 + e]) {
      throw ModelError(fmt::format(
          "eliminated variables must be the trailing ones in declaration order: expected '{}', got '{}'",
          p.names()[n1 + e], name));
    }
    phi.push_back(Expr::parse(text, p.names()));
  }
  return reduce(p, std::move(phi));
}

}  // namespace nlpflow
