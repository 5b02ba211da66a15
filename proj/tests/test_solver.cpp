#include <doctest.h>

#include <cmath>
#include <limits>

#include "nlpflow/sampling.hpp"
#include "nlpflow/solver.hpp"
#include "test_support.hpp"

using namespace nlpflow;
using testing::vec;

namespace {

SolveConfig r35_config(double r = 1.0) {
  SolveConfig cfg;
  cfg.algorithm = Algorithm::remark35;
  cfg.r = r;
  return cfg;
}

SolveConfig t31_config(double r = 0.5) {
  SolveConfig cfg;
  cfg.algorithm = Algorithm::theorem31;
  cfg.r = r;
  return cfg;
}

void check_run_invariants(const StateSpace& space, const SolveReport& rep, double armijo) {
  for (std::size_t i = 0; i < rep.history.size(); ++i) {
    const IterateRecord& rec = rep.history[i];
    const Eigen::VectorXd g = residuals(space.problem(), rec.x).g;
    CHECK(g.maxCoeff() <= 1e-10);
    if (i + 1 < rep.history.size()) {
      const double next = rep.history[i + 1].theta;
      CHECK(next <= rec.theta + armijo * rec.step * rec.dtheta_F);
      // strict decrease is only observable above the rounding unit of theta
      const double resolvable = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(rec.theta);
      if (rec.step > 0.0 && -armijo * rec.step * rec.dtheta_F > resolvable) CHECK(next < rec.theta);
    }
  }
  CHECK(descent_ledger(rep, armijo).holds);
}

}  // namespace

TEST_CASE("configuration ranges") {
  SolveConfig cfg = t31_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.epsilon = 0.6;
  CHECK_THROWS_AS(cfg.validate(), ModelError);
  cfg = t31_config();
  cfg.armijo = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ModelError);
  cfg = r35_config();
  cfg.armijo = 0.6;
  CHECK_THROWS_AS(cfg.validate(), ModelError);
  cfg.armijo = 0.5;
  CHECK_NOTHROW(cfg.validate());
  cfg.max_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), ModelError);
  cfg = r35_config();
  cfg.r = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ModelError);
}

TEST_CASE("solvers need equalities eliminated and a feasible start") {
  const auto l41 = testing::p41();
  const FieldParams prm = FieldParams::standard(3, 4, 2.0);
  CHECK_THROWS_AS(solve(StateSpace(l41.problem), prm, r35_config(), vec({0.5, 0.5, 1})), ModelError);
  CHECK_THROWS_AS(solve(l41.space(), prm, r35_config(), vec({-1, 0})), ModelError);
  CHECK_THROWS_AS(solve(l41.space(), prm, r35_config(), vec({0.5, 0.5, 1})), ModelError);
}

TEST_CASE("index set") {
  const Problem hl = testing::half_line();
  const StateSpace line(hl);
  CHECK(active_index_set(line, vec({0.5}), vec({-1.0 / 3.0}), 0.1).empty());
  CHECK(active_index_set(line, vec({0.05}), vec({-1.0 / 3.0}), 0.1) == std::vector<std::size_t>{0});

  const auto l41 = testing::p41();
  // all g <= -2 eps and |F| <= 1
  CHECK(active_index_set(l41.space(), vec({0.5, 0.5}), vec({0.6, -0.8}), 0.1).empty());

  const auto l42 = testing::p42();
  const StateSpace space = l42.space();
  const Eigen::VectorXd z = vec({-1, -1, 2});
  const FieldEval fe = field_eval(l42.problem, FieldParams::standard(4, 2, 0.2), space.lift(z));
  const auto I = active_index_set(space, z, space.restrict(fe.F), 1e-6);
  REQUIRE_FALSE(I.empty());
  CHECK(I.front() == 0);
}

TEST_CASE("inexact projection") {
  const std::vector<std::string> v{"y1", "y2"};
  const Problem half(v, Expr::parse("y1", v), {}, {Expr::parse("-y1", v)});
  const StateSpace hs(half);
  const ProjectionResult same = project_inexact(hs, vec({2, 3}), {0}, 50);
  CHECK(same.ok);
  CHECK(same.y == vec({2, 3}));

  const ProjectionResult plane = project_inexact(hs, vec({-1, 3}), {0}, 50);
  CHECK(plane.ok);
  CHECK((plane.y - vec({0, 3})).norm() <= 1e-10);
  CHECK(plane.quality == doctest::Approx(1.0).epsilon(1e-9));

  const Problem disk(v, Expr::parse("y1", v), {}, {Expr::parse("y1^2 + y2^2 - 1", v)});
  const ProjectionResult round = project_inexact(StateSpace(disk), vec({2, 0}), {0}, 50);
  CHECK(round.ok);
  CHECK((round.y - vec({1, 0})).norm() <= 1e-8);

  const ProjectionResult capped = project_inexact(StateSpace(disk), vec({2, 0}), {0}, 1);
  CHECK_FALSE(capped.ok);
}

TEST_CASE("curvature estimates") {
  const auto l41 = testing::p41();
  const StateSpace space = l41.space();
  const Eigen::VectorXd z = vec({0.5, 0.25});
  const FieldEval fe = field_eval(l41.problem, FieldParams::standard(3, 4, 2.0), space.lift(z));
  const CurvatureEstimates lin = curvature_estimates(space, fe, z, 1.0, 1e-6, CurvatureFloor::epsilon);
  CHECK(lin.raw_j.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(lin.k_j == Eigen::VectorXd::Constant(4, 1e-6));
  const CurvatureEstimates zero = curvature_estimates(space, fe, z, 1.0, 1e-6, CurvatureFloor::zero);
  CHECK(zero.k_j.isZero(0.0) == (lin.raw_j.maxCoeff() <= 0.0));

  const StateSpace b(testing::bowl(2));
  const Eigen::VectorXd x = vec({0.3, -0.4});
  const FieldEval fb = field_eval(b.problem(), FieldParams::standard(2, 0, 1.0), x);
  const CurvatureEstimates q = curvature_estimates(b, fb, x, 1.0, 1e-6, CurvatureFloor::epsilon);
  CHECK(q.raw_theta == doctest::Approx(fb.F.squaredNorm()).epsilon(1e-12));
  CHECK(q.k_theta == doctest::Approx(std::max(1e-6, fb.F.squaredNorm())));
}

TEST_CASE("constraint step formula") {
  // g + s a + s^2 K / 2 = 0 has root s = 1 for g = -1.5, a = 1, K = 1
  CHECK(constraint_step(-1.5, 1.0, 1.0, 10.0) == doctest::Approx(1.0));
  CHECK(constraint_step(-1.5, 1.0, 1.0, 0.5) == 0.5);
  // linear model
  CHECK(constraint_step(-1.0, 4.0, 0.0, 1.0) == 0.25);
  CHECK(constraint_step(-1.0, -4.0, 0.0, 1.0) == 1.0);
  // active and tangent: no room under positive curvature
  CHECK(constraint_step(0.0, 0.0, 2.0, 1.0) == 0.0);
  // active, moving inward
  CHECK(constraint_step(0.0, -1.0, 2.0, 5.0) == doctest::Approx(1.0));
  // tiny g relative to a^2: rationalized form keeps the digits
  CHECK(constraint_step(-1e-20, 1.0, 1.0, 1.0) == doctest::Approx(1e-20).epsilon(1e-12));
}

TEST_CASE("t31 on trivial cases") {
  const StateSpace b(testing::bowl(2));
  const FieldParams prm = FieldParams::standard(2, 0, 1.0);
  SolveConfig cfg = t31_config(1.0);
  const SolveReport at_min = solve(b, prm, cfg, vec({0, 0}));
  CHECK(at_min.termination == Termination::converged);
  CHECK(at_min.iterations() == 0);
  CHECK(at_min.final().x == vec({0, 0}));

  const SolveReport one = solve(b, prm, cfg, vec({1.5, -2}));
  CHECK(one.termination == Termination::converged);
  CHECK(one.iterations() == 1);
  CHECK(one.history[0].step == 1.0);
  CHECK(one.history[0].backtracks == 0);
  CHECK(one.final().norm_F == 0.0);
}

TEST_CASE("r35 on p41") {
  const auto l41 = testing::p41();
  const StateSpace space = l41.space();
  for (double sigma : {0.01, 2.0, 200.0}) {
    const FieldParams prm = FieldParams::standard(3, 4, sigma);
    for (const Eigen::VectorXd& z0 : sample_feasible(space, 5, 99)) {
      const SolveReport rep = solve(space, prm, r35_config(), z0);
      CHECK(rep.termination == Termination::converged);
      CHECK(rep.iterations() <= 5);
      CHECK((rep.final().x - vec({0, 0, 2})).norm() <= 1e-6);
      check_run_invariants(space, rep, 0.1);
    }
  }
}

TEST_CASE("both algorithms on p42") {
  const auto l42 = testing::p42();
  const StateSpace space = l42.space();
  const FieldParams prm = FieldParams::standard(4, 2, 0.2);
  const SolveReport r35 = solve(space, prm, r35_config(), vec({-0.9, -1, 2}));
  CHECK((r35.final().x - vec({0, 1, 2, -1})).norm() <= 1e-5);
  REQUIRE(r35.kkt);
  CHECK(r35.kkt->worst() <= 1e-4);
  check_run_invariants(space, r35, 0.1);

  SolveConfig cfg = t31_config();
  const SolveReport t31 = solve(space, prm, cfg, vec({-1, -1, 2}));
  CHECK(t31.termination == Termination::converged);
  CHECK((t31.final().x - vec({0, 1, 2, -1})).norm() <= 1e-5);
  REQUIRE(t31.kkt);
  CHECK(t31.kkt->worst() <= 1e-4);
  CHECK(t31.history[0].proj_used);
  CHECK(t31.licq_warnings == 0);
  check_run_invariants(space, t31, 0.1);
}

TEST_CASE("textbook curvature floor still runs") {
  const auto l42 = testing::p42();
  const StateSpace space = l42.space();
  SolveConfig cfg = r35_config();
  cfg.floor = CurvatureFloor::epsilon;
  cfg.max_iter = 400;
  const SolveReport rep = solve(space, FieldParams::standard(4, 2, 0.2), cfg, vec({-0.9, -1, 2}));
  CHECK(rep.iterations() >= 1);
  check_run_invariants(space, rep, 0.1);
}

TEST_CASE("runs are bitwise repeatable") {
  const auto l42 = testing::p42();
  const StateSpace space = l42.space();
  const FieldParams prm = FieldParams::standard(4, 2, 0.2);
  for (const SolveConfig& cfg : {r35_config(), t31_config()}) {
    const SolveReport a = solve(space, prm, cfg, vec({-1, -1, -2}));
    const SolveReport b = solve(space, prm, cfg, vec({-1, -1, -2}));
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].x == b.history[i].x);
      CHECK(a.history[i].step == b.history[i].step);
    }
  }
}

TEST_CASE("max_iter stops the run") {
  const auto l42 = testing::p42();
  SolveConfig cfg = t31_config();
  cfg.max_iter = 3;
  const SolveReport rep = solve(l42.space(), FieldParams::standard(4, 2, 0.2), cfg, vec({-1, -1, 2}));
  CHECK(rep.termination == Termination::max_iter);
  CHECK(rep.iterations() == 3);
}
