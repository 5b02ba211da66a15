#include <doctest.h>

#include <cmath>

#include "nlpflow/flow.hpp"
#include "nlpflow/sampling.hpp"
#include "test_support.hpp"

using namespace nlpflow;
using testing::vec;

TEST_CASE("linear recursion for the unconstrained bowl") {
  const StateSpace space(testing::bowl(2));
  const Eigen::VectorXd x0 = vec({1.5, -0.25});
  const Trajectory tr = euler_flow(space, FieldParams::standard(2, 0, 1.0), x0, 0.1, 50);
  REQUIRE(tr.points.size() == 51);
  CHECK_FALSE(tr.aborted);
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    const Eigen::VectorXd expected = std::pow(0.9, static_cast<double>(i)) * x0;
    CHECK((tr.points[i].x - expected).norm() <= 1e-14 * x0.norm());
    CHECK(tr.points[i].t == doctest::Approx(0.1 * static_cast<double>(i)));
  }
}

TEST_CASE("zero steps records only the start") {
  const StateSpace space(testing::bowl(2));
  const Trajectory tr = euler_flow(space, FieldParams::standard(2, 0, 1.0), vec({1, 1}), 0.1, 0);
  CHECK(tr.points.size() == 1);
  CHECK(tr.points[0].theta == 1.0);
}

TEST_CASE("bad inputs") {
  const auto l41 = testing::p41();
  const StateSpace space = l41.space();
  const FieldParams prm = FieldParams::standard(3, 4, 2.0);
  CHECK_THROWS_AS(euler_flow(space, prm, vec({-1, 0}), 0.01, 10), ModelError);
  CHECK_THROWS_AS(euler_flow(space, prm, vec({0.5, 0.5}), 0.0, 10), ModelError);
}

TEST_CASE("reduced p41: monotone flow to the solution") {
  const auto l41 = testing::p41();
  const StateSpace space = l41.space();
  const FieldParams prm = FieldParams::standard(3, 4, 2.0);
  for (const Eigen::VectorXd& z0 : sample_feasible(space, 10, 4)) {
    const Trajectory tr = euler_flow(space, prm, z0, 0.01, 2000);
    REQUIRE_FALSE(tr.aborted);
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
      const double prev = tr.points[i - 1].theta;
      CHECK(tr.points[i].theta <= prev + 1e-8 * (1.0 + std::abs(prev)));
    }
    CHECK(tr.points.back().x.head(2).norm() <= 1e-2);
  }
}

TEST_CASE("full p41 keeps the equality") {
  const auto l41 = testing::p41();
  const StateSpace space(l41.problem);
  const FieldParams prm = FieldParams::standard(3, 4, 2.0);
  const Trajectory tr = euler_flow(space, prm, vec({0.5, 0.5, 1.0}), 0.01, 2000);
  REQUIRE_FALSE(tr.aborted);
  double worst = 0.0;
  for (const auto& pt : tr.points) worst = std::max(worst, pt.max_abs_h);
  CHECK(worst <= 1e-3);
  CHECK((tr.points.back().x - vec({0, 0, 2})).norm() <= 1e-2);
}

TEST_CASE("stationary at a critical point") {
  const auto l42 = testing::p42();
  const StateSpace space = l42.space();
  const Trajectory tr = euler_flow(space, FieldParams::standard(4, 2, 0.2), vec({0, 1, 2}), 0.01, 100);
  REQUIRE(tr.points.front().norm_F <= 1e-10);
  CHECK((tr.points.back().x - tr.points.front().x).norm() <= 1e-8);
}

TEST_CASE("drift outside the feasible set aborts") {
  const std::vector<std::string> v{"x1", "x2"};
  const Problem disk(v, Expr::parse("-x1", v), {}, {Expr::parse("x1^2 + x2^2 - 1", v)});
  const Trajectory tr = euler_flow(StateSpace(disk), FieldParams::standard(2, 1, 1.0), vec({0.5, 0.5}), 5.0, 20);
  CHECK(tr.aborted);
  CHECK(tr.abort_step > 0);
  CHECK(tr.points.size() == static_cast<std::size_t>(tr.abort_step));
  CHECK(tr.diagnostic.find("drift") != std::string::npos);
}

TEST_CASE("phase grids") {
  const auto l41 = testing::p41();
  const StateSpace space = l41.space();
  const FieldParams prm = FieldParams::standard(3, 4, 2.0);

  PhaseGrid outside;
  outside.lo_i = -2.0;
  outside.hi_i = -1.0;
  outside.lo_j = -2.0;
  outside.hi_j = -1.0;
  outside.count_i = outside.count_j = 3;
  const PhaseResult none = phase_grid(space, prm, outside, 0.01, 10);
  CHECK(none.trajectories.empty());
  CHECK(none.skipped.size() == 9);

  PhaseGrid single;
  single.lo_i = single.hi_i = 0.0;
  single.lo_j = single.hi_j = 0.0;
  single.count_i = single.count_j = 1;
  const PhaseResult one = phase_grid(space, prm, single, 0.01, 50);
  REQUIRE(one.trajectories.size() == 1);
  const Trajectory& tr = one.trajectories[0].trajectory;
  CHECK((tr.points.back().x - tr.points.front().x).norm() <= 0.01 * 1e-8);

  PhaseGrid grid;
  grid.lo_i = grid.lo_j = 0.0;
  grid.hi_i = grid.hi_j = 1.5;
  grid.count_i = grid.count_j = 4;
  const auto pts = grid_points(space, grid);
  CHECK(pts.size() == 16);
  CHECK(pts[1] == vec({0.0, 0.5}));
  CHECK(pts[4] == vec({0.5, 0.0}));
  PhaseGrid same_axis = grid;
  same_axis.j = 0;
  CHECK_THROWS_AS(grid_points(space, same_axis), ModelError);
}
