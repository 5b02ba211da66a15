#include "nlpflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <unordered_map>

#include <fmt/format.h>

namespace nlpflow {

namespace detail {

void throw_dimension_mismatch(std::size_t expected, std::size_t got) {
  throw ModelError(fmt::format("expression expects {} variables, got {}", expected, got));
}

void throw_non_finite(const char* what) {
  throw EvalError(fmt::format("non-finite evaluation: {}", what));
}

}  // namespace detail

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> vars)
      : text_(text) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (!lookup_.emplace(vars[i], static_cast<std::uint32_t>(i)).second) {
        throw ParseError(fmt::format("duplicate variable name '{}'", vars[i]), 0);
      }
    }
  }

  std::vector<Expr::Node> run() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty expression", 0);
    parse_sum();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
    }
    return std::move(nodes_);
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::int32_t push(Expr::Node node) {
    nodes_.push_back(node);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::int32_t binary(Expr::Op op, std::int32_t lhs, std::int32_t rhs) {
    Expr::Node node;
    node.op = op;
    node.lhs = lhs;
    node.rhs = rhs;
    return push(node);
  }

  std::int32_t parse_sum() {
    std::int32_t lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Expr::Op::add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = binary(Expr::Op::sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_product() {
    std::int32_t lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Expr::Op::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = binary(Expr::Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_unary() {
    if (accept('-')) {
      std::int32_t operand = parse_unary();
      Expr::Node node;
      node.op = Expr::Op::neg;
      node.lhs = operand;
      return push(node);
    }
    return parse_power();
  }

  std::int32_t parse_power() {
    std::int32_t base = parse_primary();
    while (accept('^')) {
      skip_space();
      const std::size_t at = pos_;
      if (pos_ < text_.size() && text_[pos_] == '-') {
        throw ParseError("exponent must be a non-negative integer literal", at);
      }
      if (pos_ >= text_.size() || !(is_digit(text_[pos_]) || text_[pos_] == '.')) {
        throw ParseError("exponent must be a non-negative integer literal", at);
      }
      const double value = parse_number_literal();
      if (value != std::floor(value) || value > static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
        throw ParseError("exponent must be a non-negative integer literal", at);
      }
      Expr::Node node;
      node.op = Expr::Op::pow;
      node.lhs = base;
      node.index = static_cast<std::uint32_t>(value);
      base = push(node);
    }
    return base;
  }

  std::int32_t parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      std::int32_t inner = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (is_digit(c) || c == '.') {
      Expr::Node node;
      node.op = Expr::Op::constant;
      node.value = parse_number_literal();
      return push(node);
    }
    if (is_ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      auto it = lookup_.find(name);
      if (it == lookup_.end()) {
        throw ParseError(fmt::format("unknown identifier '{}'", name), start);
      }
      Expr::Node node;
      node.op = Expr::Op::variable;
      node.index = it->second;
      return push(node);
    }
    throw ParseError(fmt::format("unexpected '{}'", c), pos_);
  }

  // Scans the decimal literal grammar explicitly; from_chars alone would
  // also accept things like "inf".
  double parse_number_literal() {
    const std::size_t start = pos_;
    std::size_t digits = 0;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_, ++digits;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_, ++digits;
    }
    if (digits == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p >= text_.size() || !is_digit(text_[p])) throw ParseError("malformed exponent in number", pos_);
      while (p < text_.size() && is_digit(text_[p])) ++p;
      pos_ = p;
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      throw ParseError("number out of range", start);
    }
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::unordered_map<std::string, std::uint32_t> lookup_;
  std::vector<Expr::Node> nodes_;
};

std::string render(const std::vector<Expr::Node>& nodes,
                   const std::vector<std::string>& vars, std::int32_t at) {
  const Expr::Node& n = nodes[static_cast<std::size_t>(at)];
  switch (n.op) {
    case Expr::Op::constant: return fmt::format("{:.17g}", n.value);
    case Expr::Op::variable: return vars[n.index];
    case Expr::Op::neg: return fmt::format("(-{})", render(nodes, vars, n.lhs));
    case Expr::Op::pow: return fmt::format("({}^{})", render(nodes, vars, n.lhs), n.index);
    case Expr::Op::add:
    case Expr::Op::sub:
    case Expr::Op::mul:
    case Expr::Op::div: {
      const char op = n.op == Expr::Op::add   ? '+'
                      : n.op == Expr::Op::sub ? '-'
                      : n.op == Expr::Op::mul ? '*'
                                              : '/';
      return fmt::format("({} {} {})", render(nodes, vars, n.lhs), op, render(nodes, vars, n.rhs));
    }
  }
  return {};
}

}  // namespace

Expr Expr::parse(std::string_view text, std::span<const std::string> vars) {
  Parser parser(text, vars);
  auto data = std::make_shared<Data>();
  data->vars.assign(vars.begin(), vars.end());
  data->nodes = parser.run();
  return Expr(std::move(data));
}

bool Expr::depends_on(std::size_t var) const {
  for (const Node& n : data_->nodes) {
    if (n.op == Op::variable && n.index == var) return true;
  }
  return false;
}

std::string Expr::to_string() const {
  return render(data_->nodes, data_->vars, static_cast<std::int32_t>(data_->nodes.size() - 1));
}

Eigen::VectorXd Expr::grad(std::span<const double> x) const {
  const std::size_t n = arity();
  if (x.size() != n) detail::throw_dimension_mismatch(n, x.size());
  std::vector<Dual> seeded(n);
  for (std::size_t i = 0; i < n; ++i) seeded[i] = Dual(x[i]);
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    seeded[i].d = 1.0;
    g[static_cast<Eigen::Index>(i)] = evaluate<Dual>(seeded).d;
    seeded[i].d = 0.0;
  }
  return g;
}

}  // namespace nlpflow
