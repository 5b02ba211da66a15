#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nlpflow/dual.hpp"
#include "nlpflow/error.hpp"

namespace nlpflow {

/**
 * Immutable scalar expression over a fixed, ordered list of variables.
 *
 * Grammar (whitespace is ignored between tokens):
 *
 *     expr    = term { ("+" | "-") term } ;
 *     term    = unary { ("*" | "/") unary } ;
 *     unary   = "-" unary | power ;
 *     power   = primary { "^" integer } ;
 *     primary = number | identifier | "(" expr ")" ;
 *     number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
 *             | "." digits [ exponent part ] ;
 *
 * `^` takes a non-negative integer literal only, so `-x^2` is `-(x^2)` and
 * `x^2^3` is `(x^2)^3`. Copies share the node storage.
 */
class Expr {
 public:
  enum class Op : std::uint8_t { constant, variable, add, sub, mul, div, neg, pow };

  struct Node {
    Op op = Op::constant;
    double value = 0.0;       // constant
    std::uint32_t index = 0;  // variable index or exponent
    std::int32_t lhs = -1;
    std::int32_t rhs = -1;
  };

  /// Throws ParseError on syntax errors, unknown identifiers and bad exponents.
  static Expr parse(std::string_view text, std::span<const std::string> vars);
  static Expr parse(std::string_view text, const std::vector<std::string>& vars) {
    return parse(text, std::span<const std::string>(vars));
  }

  std::size_t arity() const { return data_->vars.size(); }
  const std::vector<std::string>& variables() const { return data_->vars; }
  const std::vector<Node>& nodes() const { return data_->nodes; }

  /// True if variable `var` occurs in the tree.
  bool depends_on(std::size_t var) const;

  /// Fully parenthesized form that parses back to an equivalent tree.
  std::string to_string() const;

  /// Throws EvalError on division by zero or any non-finite intermediate.
  double eval(std::span<const double> x) const { return evaluate<double>(x); }
  double eval(const Eigen::VectorXd& x) const {
    return eval(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

  /// Gradient by forward mode, one dual pass per variable.
  Eigen::VectorXd grad(std::span<const double> x) const;
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const {
    return grad(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

  template <class T>
  T evaluate(std::span<const T> x) const;

 private:
  struct Data {
    std::vector<std::string> vars;
    std::vector<Node> nodes;  // postorder, root last
  };

  explicit Expr(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

namespace detail {

template <class T>
T integer_power(T base, std::uint32_t exponent) {
  T result{1.0};
  while (exponent > 0) {
    if (exponent & 1U) result = result * base;
    exponent >>= 1U;
    if (exponent > 0) base = base * base;
  }
  return result;
}

[[noreturn]] void throw_dimension_mismatch(std::size_t expected, std::size_t got);
[[noreturn]] void throw_non_finite(const char* what);

}  // namespace detail

template <class T>
T Expr::evaluate(std::span<const T> x) const {
  const auto& vars = data_->vars;
  const auto& nodes = data_->nodes;
  if (x.size() != vars.size()) detail::throw_dimension_mismatch(vars.size(), x.size());

  std::vector<T> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& node = nodes[i];
    switch (node.op) {
      case Op::constant: values[i] = T{node.value}; break;
      case Op::variable: values[i] = x[node.index]; break;
      case Op::add: values[i] = values[node.lhs] + values[node.rhs]; break;
      case Op::sub: values[i] = values[node.lhs] - values[node.rhs]; break;
      case Op::mul: values[i] = values[node.lhs] * values[node.rhs]; break;
      case Op::div:
        if (value_of(values[node.rhs]) == 0.0) detail::throw_non_finite("division by zero");
        values[i] = values[node.lhs] / values[node.rhs];
        break;
      case Op::neg: values[i] = -values[node.lhs]; break;
      case Op::pow: values[i] = detail::integer_power(values[node.lhs], node.index); break;
    }
    if (!std::isfinite(value_of(values[i]))) detail::throw_non_finite("non-finite value");
  }
  return values.back();
}

}  // namespace nlpflow
