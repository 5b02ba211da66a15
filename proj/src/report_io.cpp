#include "nlpflow/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

namespace nlpflow {

namespace {

std::string join(const Eigen::VectorXd& v, char sep) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += sep;
    s += format_number(v[i]);
  }
  return s;
}

std::string join_indices(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0) s += ';';
    s += std::to_string(idx[i] + 1);
  }
  return s;
}

double parse_double(std::string_view cell) {
  const std::string s(cell);
  if (s == "nan") return std::nan("");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ModelError(fmt::format("not a number: '{}'", s));
  }
  if (used != s.size()) throw ModelError(fmt::format("not a number: '{}'", s));
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = line.find(sep, start);
    out.push_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

}  // namespace

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

void write_solve_csv(std::ostream& out, const Problem& p, const SolveConfig& cfg, double sigma,
                     const SolveReport& report) {
  out << "iter";
  for (const std::string& name : p.names()) out << ',' << name;
  out << ",theta,normF,step,backtracks,proj_used\n";
  for (const IterateRecord& rec : report.history) {
    out << rec.iter << ',' << join(rec.x, ',') << ',' << format_number(rec.theta) << ','
        << format_number(rec.norm_F) << ',' << format_number(rec.step) << ',' << rec.backtracks << ','
        << (rec.proj_used ? 1 : 0) << '\n';
  }
  out << '\n';
  out << "algo: " << to_string(report.algorithm) << '\n';
  out << "sigma: " << format_number(sigma) << '\n';
  out << "r: " << format_number(cfg.r) << '\n';
  out << "armijo: " << format_number(cfg.armijo) << '\n';
  out << "eps: " << format_number(cfg.epsilon) << '\n';
  out << "stop_tol: " << format_number(cfg.stop_tol) << '\n';
  out << "curvature_floor: " << (cfg.floor == CurvatureFloor::epsilon ? "epsilon" : "zero") << '\n';
  out << "seed: " << report.seed << '\n';
  out << "termination: " << to_string(report.termination) << '\n';
  out << "iterations: " << report.iterations() << '\n';
  if (!report.diagnostic.empty()) out << "diagnostic: " << report.diagnostic << '\n';
  out << "licq_warnings: " << report.licq_warnings << '\n';
  if (report.algorithm == Algorithm::theorem31) {
    std::string sets;
    for (std::size_t i = 0; i + 1 < report.history.size(); ++i) {
      if (i > 0) sets += ' ';
      sets += '{' + join_indices(report.history[i].index_set) + '}';
    }
    out << "index_sets: " << sets << '\n';
  }
  const DescentLedger ledger = descent_ledger(report, cfg.armijo);
  out << "ledger_sum: " << format_number(ledger.weighted_sum) << '\n';
  out << "ledger_bound: " << format_number(ledger.bound) << '\n';
  if (report.kkt) {
    out << "lambda: " << join(report.kkt->lambda, ';') << '\n';
    out << "mu: " << join(report.kkt->mu, ';') << '\n';
    out << "stationarity_residual: " << format_number(report.kkt->stationarity_residual) << '\n';
    out << "complementarity_residual: " << format_number(report.kkt->complementarity_residual) << '\n';
    out << "mu_negativity: " << format_number(report.kkt->mu_negativity) << '\n';
    out << "is_critical: " << (report.kkt->is_critical ? "true" : "false") << '\n';
  }
}

void write_flow_header(std::ostream& out, const Problem& p, bool with_id) {
  if (with_id) out << "traj_id,";
  out << 't';
  for (const std::string& name : p.names()) out << ',' << name;
  out << ",theta,normF,max_g,max_abs_h\n";
}

void write_flow_rows(std::ostream& out, const Trajectory& traj, std::optional<std::size_t> traj_id) {
  for (const TrajectoryPoint& pt : traj.points) {
    if (traj_id) out << *traj_id << ',';
    out << format_number(pt.t) << ',' << join(pt.x, ',') << ',' << format_number(pt.theta) << ','
        << format_number(pt.norm_F) << ',' << format_number(pt.max_g) << ',' << format_number(pt.max_abs_h)
        << '\n';
  }
}

void write_kkt(std::ostream& out, const KktReport& kkt, double norm_F) {
  out << "lambda: " << join(kkt.lambda, ';') << '\n';
  out << "mu: " << join(kkt.mu, ';') << '\n';
  out << "stationarity_residual: " << format_number(kkt.stationarity_residual) << '\n';
  out << "complementarity_residual: " << format_number(kkt.complementarity_residual) << '\n';
  out << "mu_negativity: " << format_number(kkt.mu_negativity) << '\n';
  out << "normF: " << format_number(norm_F) << '\n';
  out << "is_critical: " << (kkt.is_critical ? "true" : "false") << '\n';
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ModelError(fmt::format("CSV has no column '{}'", name));
}

std::optional<std::string> CsvTable::value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return std::nullopt;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ModelError("empty CSV");
  for (std::string_view cell : split(line, ',')) table.header.emplace_back(cell);
  bool in_meta = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      in_meta = true;
      continue;
    }
    if (in_meta) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) throw ModelError(fmt::format("bad key: value line '{}'", line));
      std::string value = line.substr(colon + 1);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      table.meta.emplace_back(line.substr(0, colon), value);
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != table.header.size()) {
      throw ModelError(fmt::format("CSV row has {} cells, header has {}", cells.size(), table.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::string_view cell : cells) row.push_back(parse_double(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Rescore rescore_solve_csv(const Problem& p, const FieldParams& params, const CsvTable& table) {
  std::vector<std::size_t> xcols;
  for (const std::string& name : p.names()) xcols.push_back(table.column(name));
  const std::size_t tcol = table.column("theta");
  const std::size_t fcol = table.column("normF");
  Rescore score;
  for (const auto& row : table.rows) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(xcols.size()));
    for (std::size_t i = 0; i < xcols.size(); ++i) x[static_cast<Eigen::Index>(i)] = row[xcols[i]];
    const double theta = p.objective().eval(x);
    const double nf = field_eval(p, params, x).norm_F();
    score.max_theta_error = std::max(score.max_theta_error, std::abs(theta - row[tcol]));
    score.max_norm_F_error = std::max(score.max_norm_F_error, std::abs(nf - row[fcol]));
    ++score.rows;
  }
  return score;
}

}  // namespace nlpflow
