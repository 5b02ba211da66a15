#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "nlpflow/problem.hpp"
#include "nlpflow/state_space.hpp"

namespace nlpflow {

/// A loaded problem file.
///
///   # comment
///   vars: x1 x2 x3
///   objective: x1^2 + x2
///   eq: x1 + x2 + x3 - 2
///   ineq: -x1
///   eliminate: x3 = 2 - x1 - x2
///
/// Exactly one vars line (first) and one objective line; eq/ineq/eliminate
/// lines may repeat. eq means expr == 0, ineq means expr <= 0.
struct LoadedProblem {
  Problem problem;
  std::optional<ReducedProblem> reduced;

  /// Reduced coordinates when eliminations were given, else the full space.
  StateSpace space() const { return reduced ? StateSpace(*reduced) : StateSpace(problem); }
};

/// Throws ParseError (with 1-based line) for format and expression errors,
/// ModelError when the problem or the elimination is invalid.
LoadedProblem parse_problem(std::string_view text);

LoadedProblem load_problem(const std::string& path);

}  // namespace nlpflow
