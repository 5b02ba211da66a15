#include <doctest.h>

#include <random>

#include "nlpflow/problem.hpp"
#include "nlpflow/state_space.hpp"
#include "test_support.hpp"

using namespace nlpflow;
using testing::vec;

TEST_CASE("residuals at reference points") {
  const auto l41 = testing::p41();
  const auto l42 = testing::p42();
  const Residuals r42 = residuals(l42.problem, vec({0, 1, 2, -1}));
  CHECK(r42.h == vec({0}));
  CHECK(r42.g == vec({0, -1}));
  const Residuals r41 = residuals(l41.problem, vec({0, 0, 2}));
  CHECK(r41.h == vec({0}));
  CHECK(r41.g == vec({-3, 0, 0, -2}));
  const Residuals r0 = residuals(testing::bowl(2), vec({1, 1}));
  CHECK(r0.h.size() == 0);
  CHECK(r0.g.size() == 0);
}

TEST_CASE("feasibility") {
  const auto l41 = testing::p41();
  const auto l42 = testing::p42();
  CHECK(residuals(l42.problem, vec({-1, -1, 2, 1})).g[0] == 0.0);
  CHECK(is_feasible(l42.problem, vec({-1, -1, 2, 1}), 1e-10));
  CHECK_FALSE(is_feasible(l41.problem, vec({-1, 0, 3}), 0.5));
  CHECK(is_feasible(testing::bowl(3), vec({100, -100, 7}), 0.0));
  CHECK(infeasibility(residuals(l41.problem, vec({-1, 0, 3}))) == 1.0);
}

TEST_CASE("Jacobians") {
  const auto l41 = testing::p41();
  const auto l42 = testing::p42();
  const Jacobians j41 = jacobians(l41.problem, vec({0.3, -1.2, 5}));
  CHECK(j41.A == Eigen::RowVector3d(1, 1, 1));
  const Jacobians j42 = jacobians(l42.problem, vec({0, 1, 2, -1}));
  CHECK(Eigen::VectorXd(j42.A.row(0).transpose()) == vec({2, 1, 4, -1}));
  CHECK(Eigen::VectorXd(j42.B.row(0).transpose()) == vec({1, 1, 5, -3}));
  const Jacobians j0 = jacobians(testing::bowl(2), vec({1, 2}));
  CHECK(j0.A.rows() == 0);
  CHECK(j0.B.rows() == 0);
  CHECK(j0.A.cols() == 2);
}

TEST_CASE("Jacobians match difference quotients along random directions") {
  const auto l42 = testing::p42();
  const Problem& p = l42.problem;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(4), d(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = unif(rng);
      d[i] = unif(rng);
    }
    d.normalize();
    const double eps = 1e-5;
    const Residuals r0 = residuals(p, x);
    const Residuals r1 = residuals(p, x + eps * d);
    const Jacobians j = jacobians(p, x);
    CHECK(((r1.h - r0.h) / eps - j.A * d).norm() <= 1e-4);
    CHECK(((r1.g - r0.g) / eps - j.B * d).norm() <= 1e-4);
  }
}

TEST_CASE("LICQ") {
  const auto l41 = testing::p41();
  CHECK(check_licq(l41.problem, vec({0, 0, 2})));
  const std::vector<std::string> v{"x1", "x2"};
  const Problem dup(v, Expr::parse("x2", v), {}, {Expr::parse("-x1", v), Expr::parse("-x1", v)});
  CHECK_FALSE(check_licq(dup, vec({0, 1})));
  CHECK(check_licq(dup, vec({1, 1})));
  CHECK(check_licq(testing::bowl(2), vec({1, 1})));
  // More active rows than variables.
  const Problem crowded(v, Expr::parse("x2", v), {},
                        {Expr::parse("-x1", v), Expr::parse("-x2", v), Expr::parse("-x1 - x2", v)});
  CHECK_FALSE(check_licq(crowded, vec({0, 0})));
}

TEST_CASE("problem validation") {
  const std::vector<std::string> v{"x1"};
  CHECK_THROWS_AS(Problem(v, Expr::parse("x1", v), {Expr::parse("x1", v)}, {}), ModelError);
  const std::vector<std::string> w{"x1", "x2"};
  CHECK_THROWS_AS(Problem(w, Expr::parse("x1", v), {}, {}), ModelError);
  CHECK_THROWS_AS(Problem({}, Expr::parse("1", std::vector<std::string>{}), {}, {}), ModelError);
}

TEST_CASE("elimination of p41") {
  const auto l41 = testing::p41();
  const ReducedProblem red = reduce(l41.problem, {{"x3", "2 - x1 - x2"}});
  CHECK(red.n1() == 2);
  CHECK(red.n2() == 1);
  CHECK(red.objective(vec({0, 0})) == -24.0);
  CHECK(red.lift(vec({0.5, 0.25})) == vec({0.5, 0.25, 1.25}));
  CHECK_THROWS_AS(reduce(l41.problem, {{"x3", "0"}}), ModelError);
  CHECK_THROWS_AS(reduce(l41.problem, {{"x1", "2 - x2 - x3"}}), ModelError);
  CHECK_THROWS_AS(reduce(l41.problem, {{"x3", "2 - x1 - x2 + 0*x3"}}), ModelError);
}

TEST_CASE("elimination of p42") {
  const auto l42 = testing::p42();
  REQUIRE(l42.reduced);
  const ReducedProblem& red = *l42.reduced;
  CHECK(red.lift(vec({-1, -1, 2})) == vec({-1, -1, 2, 1}));
  CHECK(red.lift(vec({0, 1, 2})) == vec({0, 1, 2, -1}));
}

TEST_CASE("reduced functions are the compositions") {
  const auto l42 = testing::p42();
  const ReducedProblem& red = *l42.reduced;
  const Problem& p = l42.problem;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd xi = vec({unif(rng), unif(rng), unif(rng)});
    const Eigen::VectorXd x = red.lift(xi);
    CHECK(red.objective(xi) == p.objective().eval(x));
    CHECK(red.inequalities(xi) == residuals(p, x).g);
    CHECK(std::abs(residuals(p, x).h[0]) <= 1e-10);

    const auto theta = [&](const Eigen::VectorXd& y) { return red.objective(y); };
    const Eigen::VectorXd fd = testing::central_difference(theta, xi);
    CHECK((red.objective_gradient(xi) - fd).norm() <= 1e-5 * (1.0 + fd.norm()));
    // chain rule: grad theta~ = grad theta * D lift
    const Eigen::MatrixXd J = red.lift_jacobian(xi);
    CHECK((red.objective_gradient(xi) - J.transpose() * p.objective().grad(x)).norm() <= 1e-12 * (1 + fd.norm()));
    CHECK((red.inequality_jacobian(xi) - jacobians(p, x).B * J).norm() <= 1e-12 * (1 + J.norm() * 20));
    CHECK((jacobians(p, x).A * J).norm() <= 1e-12 * 100);
  }
}

TEST_CASE("state space coordinates") {
  const auto l42 = testing::p42();
  const StateSpace space = l42.space();
  CHECK(space.is_reduced());
  CHECK(space.dim() == 3);
  CHECK(space.free_equalities() == 0);
  CHECK(space.state_from(vec({-1, -1, 2, 1})) == vec({-1, -1, 2}));
  CHECK(space.state_from(vec({-1, -1, 2})) == vec({-1, -1, 2}));
  CHECK_THROWS_AS(space.state_from(vec({-1, -1, 2, 1.5})), ModelError);
  CHECK_THROWS_AS(space.state_from(vec({1, 2})), ModelError);
  const StateSpace full(l42.problem);
  CHECK(full.dim() == 4);
  CHECK(full.free_equalities() == 1);
}
