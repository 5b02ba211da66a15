#include <doctest.h>

#include <cmath>
#include <random>

#include "nlpflow/expr.hpp"
#include "test_support.hpp"

using nlpflow::EvalError;
using nlpflow::Expr;
using nlpflow::ParseError;
using testing::vec;

namespace {
const std::vector<std::string> kX12{"x1", "x2"};
const std::vector<std::string> kX1234{"x1", "x2", "x3", "x4"};
}  // namespace

TEST_CASE("parse and evaluate small expressions") {
  CHECK(Expr::parse("x1^2 + 2*x2", kX12).eval(vec({1, 2})) == 5.0);
  CHECK(Expr::parse("-x1", std::vector<std::string>{"x1"}).eval(vec({3})) == -3.0);
  CHECK(Expr::parse("7", kX12).eval(vec({0.3, -2})) == 7.0);
  CHECK(Expr::parse("1.5e2 + .5", kX12).eval(vec({0, 0})) == 150.5);
}

TEST_CASE("precedence and associativity") {
  const Eigen::VectorXd x = vec({3, 2});
  CHECK(Expr::parse("-x1^2", kX12).eval(x) == -9.0);
  CHECK(Expr::parse("x1 - x2 - 1", kX12).eval(x) == 0.0);
  CHECK(Expr::parse("x1 / x2 / 2", kX12).eval(x) == 0.75);
  CHECK(Expr::parse("x2^2^3", kX12).eval(x) == 64.0);
  CHECK(Expr::parse("2 + x1 * x2", kX12).eval(x) == 8.0);
  CHECK(Expr::parse("(2 + x1) * x2", kX12).eval(x) == 10.0);
  CHECK(Expr::parse("x1^0", kX12).eval(x) == 1.0);
  CHECK(Expr::parse("--x1", kX12).eval(x) == 3.0);
}

TEST_CASE("parse errors carry offsets") {
  try {
    Expr::parse("x1 + x5", kX12);
    FAIL("expected unknown identifier");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
    CHECK(std::string(e.what()).find("x5") != std::string::npos);
  }
  CHECK_THROWS_AS(Expr::parse("", kX12), ParseError);
  CHECK_THROWS_AS(Expr::parse("   ", kX12), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1 +", kX12), ParseError);
  CHECK_THROWS_AS(Expr::parse("(x1", kX12), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1 x2", kX12), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1^2.5", kX12), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1^-1", kX12), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1^x2", kX12), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1 $ 2", kX12), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1", std::vector<std::string>{"x1", "x1"}), ParseError);
}

TEST_CASE("evaluation errors") {
  const std::vector<std::string> v{"x1"};
  CHECK_THROWS_AS(Expr::parse("x1/x1", v).eval(vec({0})), EvalError);
  CHECK_THROWS_AS(Expr::parse("x1/x1", v).grad(vec({0})), EvalError);
  CHECK_THROWS_AS(Expr::parse("x1^400", v).eval(vec({1e10})), EvalError);
  CHECK_THROWS_AS(Expr::parse("x1 + x2", kX12).eval(vec({1})), nlpflow::ModelError);
}

TEST_CASE("objective values of the shipped problems") {
  const std::vector<std::string> v3{"x1", "x2", "x3"};
  const Expr theta41 = Expr::parse("x1^2 + 2*x2^2 + x1*x2 - 6*x1 - 2*x2 - 12*x3", v3);
  CHECK(theta41.eval(vec({0, 0, 2})) == -24.0);
}

TEST_CASE("gradients") {
  const Eigen::VectorXd g = Expr::parse("x1*x2", kX12).grad(vec({2, 3}));
  CHECK(g[0] == 3.0);
  CHECK(g[1] == 2.0);
  CHECK(Expr::parse("5", kX12).grad(vec({1, 1})).isZero(0.0));

  const Expr theta42 =
      Expr::parse("x1^2 + x2^2 + 2*x3^2 + x4^2 - 5*x1 - 5*x2 - 21*x3 + 7*x4", kX1234);
  const Eigen::VectorXd g42 = theta42.grad(vec({0, 1, 2, -1}));
  CHECK(g42 == vec({-5, -3, -13, 5}));

  const Expr quotient = Expr::parse("x1 / x2", kX12);
  const Eigen::VectorXd gq = quotient.grad(vec({3, 2}));
  CHECK(gq[0] == doctest::Approx(0.5));
  CHECK(gq[1] == doctest::Approx(-0.75));
}

TEST_CASE("dependency query") {
  const Expr e = Expr::parse("x1 + 0*x3", std::vector<std::string>{"x1", "x2", "x3"});
  CHECK(e.depends_on(0));
  CHECK_FALSE(e.depends_on(1));
  CHECK(e.depends_on(2));
}

TEST_CASE("gradients agree with central differences on random polynomials") {
  testing::RandomPolynomial gen(12345);
  const std::vector<std::string> vars{"x1", "x2", "x3"};
  std::uniform_real_distribution<double> unif(-10.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = Expr::parse(gen(vars), vars);
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = unif(gen.rng());
    const Eigen::VectorXd ad = e.grad(x);
    const Eigen::VectorXd fd = testing::central_difference([&](const Eigen::VectorXd& y) { return e.eval(y); }, x);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(ad[i] - fd[i]) <= 1e-5 * (1.0 + std::abs(ad[i])));
    }
  }
}

TEST_CASE("printing and re-parsing preserves values and gradients") {
  testing::RandomPolynomial gen(777);
  const std::vector<std::string> vars{"x1", "x2", "x3"};
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Expr e = Expr::parse(gen(vars), vars);
    const Expr again = Expr::parse(e.to_string(), vars);
    CHECK(again.to_string() == e.to_string());
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd x(3);
      for (int i = 0; i < 3; ++i) x[i] = unif(gen.rng());
      CHECK(again.eval(x) == e.eval(x));
      CHECK(again.grad(x) == e.grad(x));
    }
  }
}
