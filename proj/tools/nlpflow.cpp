#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nlpflow/field.hpp"
#include "nlpflow/flow.hpp"
#include "nlpflow/identities.hpp"
#include "nlpflow/kkt.hpp"
#include "nlpflow/log.hpp"
#include "nlpflow/problem_io.hpp"
#include "nlpflow/report_io.hpp"
#include "nlpflow/solver.hpp"

namespace {

using namespace nlpflow;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    while (used < s.size() && s[used] == ' ') ++used;
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(fmt::format("{}: '{}' is not a number", what, s));
}

Eigen::VectorXd parse_vector(const std::string& s, const std::string& what) {
  const auto parts = split(s, ',');
  if (parts.empty()) throw UsageError(fmt::format("{} is empty", what));
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(parts[i], what);
  return v;
}

std::size_t state_index(const StateSpace& space, const std::string& token) {
  const auto& names = space.problem().names();
  for (std::size_t i = 0; i < space.dim(); ++i) {
    if (names[i] == token) return i;
  }
  const double v = to_double(token, "--plane");
  if (v < 1 || v > static_cast<double>(space.dim()) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw UsageError(fmt::format("--plane: '{}' is not a state coordinate (1..{})", token, space.dim()));
  }
  return static_cast<std::size_t>(v) - 1;
}

// Output goes to --out when given, else stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError(fmt::format("cannot write '{}'", path));
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

FieldParams params_for(const Problem& p, double sigma) {
  if (!(sigma > 0.0)) throw UsageError("--sigma must be positive");
  FieldParams params = FieldParams::standard(p.n(), p.k(), sigma);
  params.validate(p.n(), p.k());
  return params;
}

struct SolveArgs {
  std::string problem, algo = "r35", x0, out;
  double sigma = 1.0, r = 1.0, armijo = 0.1, eps = 1e-6, tol = 1e-9;
  long max_iter = 1000;
  int max_inner = 100;
  std::uint64_t seed = 0;
  bool strict_floor = false;
};

int run_solve(const SolveArgs& a) {
  const LoadedProblem lp = load_problem(a.problem);
  const StateSpace space = lp.space();
  SolveConfig cfg;
  cfg.algorithm = a.algo == "t31" ? Algorithm::theorem31 : Algorithm::remark35;
  cfg.r = a.r;
  cfg.epsilon = a.eps;
  cfg.armijo = a.armijo;
  cfg.max_iter = a.max_iter;
  cfg.stop_tol = a.tol;
  cfg.projection_max_inner = a.max_inner;
  cfg.seed = a.seed;
  cfg.floor = a.strict_floor ? CurvatureFloor::epsilon : CurvatureFloor::zero;
  const FieldParams params = params_for(lp.problem, a.sigma);
  const Eigen::VectorXd z0 = space.state_from(parse_vector(a.x0, "--x0"));
  const SolveReport report = solve(space, params, cfg, z0);
  Output out(a.out);
  write_solve_csv(out.stream(), lp.problem, cfg, a.sigma, report);
  if (report.termination == Termination::converged) return 0;
  std::cerr << "nlpflow: solve " << to_string(report.termination) << ": " << report.diagnostic << '\n';
  return report.termination == Termination::stalled_critical ? 0 : kExitFailure;
}

struct FlowArgs {
  std::string problem, x0, out;
  double sigma = 1.0, step = 0.01;
  long steps = 2000;
};

int run_flow(const FlowArgs& a) {
  const LoadedProblem lp = load_problem(a.problem);
  const StateSpace space = lp.space();
  const FieldParams params = params_for(lp.problem, a.sigma);
  const Eigen::VectorXd z0 = space.state_from(parse_vector(a.x0, "--x0"));
  const Trajectory traj = euler_flow(space, params, z0, a.step, a.steps);
  Output out(a.out);
  write_flow_header(out.stream(), lp.problem, false);
  write_flow_rows(out.stream(), traj, std::nullopt);
  if (traj.aborted) {
    std::cerr << "nlpflow: flow aborted at " << traj.diagnostic << '\n';
    return kExitFailure;
  }
  return 0;
}

struct PhaseArgs {
  std::string problem, plane = "1,2", range, grid = "11x11", fix, out;
  double sigma = 1.0, step = 0.01;
  long steps = 2000;
  bool split_files = false;
};

int run_phase(const PhaseArgs& a) {
  const LoadedProblem lp = load_problem(a.problem);
  const StateSpace space = lp.space();
  const FieldParams params = params_for(lp.problem, a.sigma);

  PhaseGrid grid;
  const auto plane = split(a.plane, ',');
  if (plane.size() != 2) throw UsageError("--plane needs two coordinates, e.g. 1,2");
  grid.i = state_index(space, plane[0]);
  grid.j = state_index(space, plane[1]);
  const Eigen::VectorXd range = parse_vector(a.range, "--range");
  if (range.size() != 4) throw UsageError("--range needs a,b,c,d");
  grid.lo_i = range[0];
  grid.hi_i = range[1];
  grid.lo_j = range[2];
  grid.hi_j = range[3];
  const auto counts = split(a.grid, 'x');
  if (counts.size() != 2) throw UsageError("--grid needs GxG, e.g. 11x11");
  const double ci = to_double(counts[0], "--grid");
  const double cj = to_double(counts[1], "--grid");
  if (ci < 1 || cj < 1) throw UsageError("--grid counts must be positive");
  grid.count_i = static_cast<std::size_t>(ci);
  grid.count_j = static_cast<std::size_t>(cj);
  grid.fixed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dim()));
  if (!a.fix.empty()) {
    for (const std::string& item : split(a.fix, ',')) {
      const auto kv = split(item, '=');
      if (kv.size() != 2) throw UsageError(fmt::format("--fix: expected name=value, got '{}'", item));
      grid.fixed[static_cast<Eigen::Index>(state_index(space, kv[0]))] = to_double(kv[1], "--fix");
    }
  }

  const PhaseResult result = phase_grid(space, params, grid, a.step, a.steps);
  bool aborted = false;
  if (a.split_files) {
    if (a.out.empty()) throw UsageError("--split needs --out as a file prefix");
    for (const PhaseTrajectory& pt : result.trajectories) {
      Output out(fmt::format("{}_{}.csv", a.out, pt.id));
      write_flow_header(out.stream(), lp.problem, false);
      write_flow_rows(out.stream(), pt.trajectory, std::nullopt);
      aborted = aborted || pt.trajectory.aborted;
    }
  } else {
    Output out(a.out);
    write_flow_header(out.stream(), lp.problem, true);
    for (const PhaseTrajectory& pt : result.trajectories) {
      write_flow_rows(out.stream(), pt.trajectory, pt.id);
      aborted = aborted || pt.trajectory.aborted;
    }
  }
  std::cerr << fmt::format("nlpflow: {} trajectories, {} grid points skipped (infeasible)\n",
                           result.trajectories.size(), result.skipped.size());
  return aborted ? kExitFailure : 0;
}

struct KktArgs {
  std::string problem, x;
  double sigma = 1.0, tol = kDefaultKktTol;
};

int run_kkt(const KktArgs& a) {
  const LoadedProblem lp = load_problem(a.problem);
  const StateSpace space = lp.space();
  const FieldParams params = params_for(lp.problem, a.sigma);
  const Eigen::VectorXd x = space.lift(space.state_from(parse_vector(a.x, "--x")));
  if (!is_feasible(lp.problem, x, 1e-8)) throw UsageError("--x is not feasible (tolerance 1e-8)");
  const FieldEval fe = field_eval(lp.problem, params, x);
  const KktReport kkt = kkt_report(lp.problem, fe, a.tol);
  write_kkt(std::cout, kkt, fe.norm_F());
  return 0;
}

struct CheckArgs {
  std::string problem;
  double sigma = 1.0;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
};

int run_check(const CheckArgs& a) {
  const LoadedProblem lp = load_problem(a.problem);
  const StateSpace space = lp.space();
  const FieldParams params = params_for(lp.problem, a.sigma);
  const SuiteSummary s = run_invariant_suite(space, params, a.samples, a.seed);
  for (const std::string& m : s.messages) std::cout << "violation: " << m << '\n';
  std::cout << "points: " << s.points << '\n'
            << "checks: " << s.checks << '\n'
            << "failures: " << s.failures << '\n'
            << "criticality_gray: " << s.gray << '\n'
            << "criticality_hard: " << s.hard << '\n'
            << "result: " << (s.passed() ? "pass" : "fail") << '\n';
  return s.passed() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback-stabilization solver for smooth nonlinear programs"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "run a discrete algorithm, write the iterate CSV");
  solve_cmd->add_option("--problem", sa.problem, "problem file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--algo", sa.algo, "t31 | r35")->check(CLI::IsMember({"t31", "r35"}));
  solve_cmd->add_option("--x0", sa.x0, "start point v1,v2,...")->required();
  solve_cmd->add_option("--sigma", sa.sigma, "R1 = sigma I");
  solve_cmd->add_option("--r", sa.r, "largest step");
  solve_cmd->add_option("--armijo", sa.armijo, "sufficient decrease constant");
  solve_cmd->add_option("--eps", sa.eps, "epsilon");
  solve_cmd->add_option("--max-iter", sa.max_iter, "iteration limit");
  solve_cmd->add_option("--tol", sa.tol, "stop when |F| <= tol");
  solve_cmd->add_option("--max-inner", sa.max_inner, "projection step limit (t31)");
  solve_cmd->add_option("--seed", sa.seed, "recorded in the report");
  solve_cmd->add_flag("--strict-floor", sa.strict_floor, "r35: floor initial curvatures at eps");
  solve_cmd->add_option("--out", sa.out, "CSV path (default stdout)");

  FlowArgs fa;
  auto* flow_cmd = app.add_subcommand("flow", "explicit Euler trajectory");
  flow_cmd->add_option("--problem", fa.problem, "problem file")->required()->check(CLI::ExistingFile);
  flow_cmd->add_option("--x0", fa.x0, "start point")->required();
  flow_cmd->add_option("--sigma", fa.sigma, "R1 = sigma I");
  flow_cmd->add_option("--step", fa.step, "time step");
  flow_cmd->add_option("--steps", fa.steps, "number of steps");
  flow_cmd->add_option("--out", fa.out, "CSV path (default stdout)");

  PhaseArgs pa;
  auto* phase_cmd = app.add_subcommand("phase", "Euler trajectories from a grid of starts");
  phase_cmd->add_option("--problem", pa.problem, "problem file")->required()->check(CLI::ExistingFile);
  phase_cmd->add_option("--plane", pa.plane, "two state coordinates (1-based or names)");
  phase_cmd->add_option("--range", pa.range, "a,b,c,d")->required();
  phase_cmd->add_option("--grid", pa.grid, "GxG");
  phase_cmd->add_option("--fix", pa.fix, "name=v,... for the other coordinates (default 0)");
  phase_cmd->add_option("--sigma", pa.sigma, "R1 = sigma I");
  phase_cmd->add_option("--step", pa.step, "time step");
  phase_cmd->add_option("--steps", pa.steps, "number of steps");
  phase_cmd->add_option("--out", pa.out, "CSV path, or file prefix with --split");
  phase_cmd->add_flag("--split", pa.split_files, "one CSV per trajectory");

  KktArgs ka;
  auto* kkt_cmd = app.add_subcommand("kkt", "multipliers and KKT residuals at a point");
  kkt_cmd->add_option("--problem", ka.problem, "problem file")->required()->check(CLI::ExistingFile);
  kkt_cmd->add_option("--x", ka.x, "point")->required();
  kkt_cmd->add_option("--sigma", ka.sigma, "R1 = sigma I (for |F|)");
  kkt_cmd->add_option("--tol", ka.tol, "criticality tolerance");

  CheckArgs ca;
  auto* check_cmd = app.add_subcommand("check", "field and KKT invariants at random feasible points");
  check_cmd->add_option("--problem", ca.problem, "problem file")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--samples", ca.samples, "number of points");
  check_cmd->add_option("--seed", ca.seed, "sampling seed");
  check_cmd->add_option("--sigma", ca.sigma, "R1 = sigma I");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*solve_cmd) return run_solve(sa);
    if (*flow_cmd) return run_flow(fa);
    if (*phase_cmd) return run_phase(pa);
    if (*kkt_cmd) return run_kkt(ka);
    if (*check_cmd) return run_check(ca);
  } catch (const UsageError& e) {
    std::cerr << "nlpflow: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "nlpflow: parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ModelError& e) {
    std::cerr << "nlpflow: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FactorizationError& e) {
    std::cerr << "nlpflow: factorization failed: " << e.what() << " (pivot " << e.pivot_index() + 1 << " = "
              << e.pivot() << ")\n";
    return kExitFailure;
  } catch (const Error& e) {
    std::cerr << "nlpflow: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
