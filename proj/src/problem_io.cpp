#include "nlpflow/problem_io.hpp"

#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace nlpflow {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Line {
  std::size_t number;
  std::string text;
};

Expr parse_at(const Line& line, std::string_view text, const std::vector<std::string>& vars) {
  try {
    return Expr::parse(text, vars);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("line {}: {}", line.number, e.what()), e.offset(), line.number);
  }
}

}  // namespace

LoadedProblem parse_problem(std::string_view text) {
  std::vector<std::string> vars;
  bool have_vars = false;
  std::optional<Line> objective;
  std::vector<Line> eqs, ineqs, elims;

  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(fmt::format("line {}: expected 'key: value'", number), 0, number);
    }
    const std::string_view key = trim(line.substr(0, colon));
    const std::string value(trim(line.substr(colon + 1)));
    if (key == "vars") {
      if (have_vars) throw ParseError(fmt::format("line {}: second vars line", number), 0, number);
      std::istringstream in(value);
      for (std::string name; in >> name;) vars.push_back(name);
      if (vars.empty()) throw ParseError(fmt::format("line {}: vars line is empty", number), 0, number);
      have_vars = true;
      continue;
    }
    if (!have_vars) throw ParseError(fmt::format("line {}: vars line must come first", number), 0, number);
    if (key == "objective") {
      if (objective) throw ParseError(fmt::format("line {}: second objective line", number), 0, number);
      objective = Line{number, value};
    } else if (key == "eq") {
      eqs.push_back({number, value});
    } else if (key == "ineq") {
      ineqs.push_back({number, value});
    } else if (key == "eliminate") {
      elims.push_back({number, value});
    } else {
      throw ParseError(fmt::format("line {}: unknown key '{}'", number, key), 0, number);
    }
  }
  if (!have_vars) throw ParseError("missing vars line", 0, 0);
  if (!objective) throw ParseError("missing objective line", 0, 0);

  Expr theta = parse_at(*objective, objective->text, vars);
  std::vector<Expr> h, g;
  for (const Line& l : eqs) h.push_back(parse_at(l, l.text, vars));
  for (const Line& l : ineqs) g.push_back(parse_at(l, l.text, vars));

  LoadedProblem loaded{Problem(vars, std::move(theta), std::move(h), std::move(g)), std::nullopt};
  if (elims.empty()) return loaded;

  const std::size_t n2 = elims.size();
  if (n2 > vars.size()) throw ModelError("more eliminate lines than variables");
  std::vector<Expr> phi;
  for (std::size_t i = 0; i < n2; ++i) {
    const Line& l = elims[i];
    const auto eq = l.text.find('=');
    if (eq == std::string::npos) {
      throw ParseError(fmt::format("line {}: expected 'name = expression'", l.number), 0, l.number);
    }
    const std::string name(trim(std::string_view(l.text).substr(0, eq)));
    const std::string& expected = vars[vars.size() - n2 + i];
    if (name != expected) {
      throw ParseError(fmt::format("line {}: eliminated variables must be the trailing vars in order; expected "
                                   "'{}', got '{}'",
                                   l.number, expected, name),
                       0, l.number);
    }
    phi.push_back(parse_at(l, trim(std::string_view(l.text).substr(eq + 1)), vars));
  }
  loaded.reduced = reduce(loaded.problem, std::move(phi));
  return loaded;
}

LoadedProblem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(fmt::format("cannot open problem file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

}  // namespace nlpflow
