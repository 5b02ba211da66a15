#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlpflow/field.hpp"
#include "nlpflow/flow.hpp"
#include "nlpflow/kkt.hpp"
#include "nlpflow/solver.hpp"

namespace nlpflow {

/// %.17g
std::string format_number(double v);

/// iter,<vars>,theta,normF,step,backtracks,proj_used rows, a blank line, then
/// key: value lines (config, termination, KKT data).
void write_solve_csv(std::ostream& out, const Problem& p, const SolveConfig& cfg, double sigma,
                     const SolveReport& report);

/// t,<vars>,theta,normF,max_g,max_abs_h; with traj_id first when given.
void write_flow_header(std::ostream& out, const Problem& p, bool with_id);
void write_flow_rows(std::ostream& out, const Trajectory& traj, std::optional<std::size_t> traj_id);

void write_kkt(std::ostream& out, const KktReport& kkt, double norm_F);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> meta;  // trailing key: value block

  std::size_t column(const std::string& name) const;  // throws ModelError
  std::optional<std::string> value(const std::string& key) const;
};

CsvTable read_csv(std::istream& in);

struct Rescore {
  double max_theta_error = 0.0;
  double max_norm_F_error = 0.0;
  std::size_t rows = 0;
};

/// Recomputes theta and |F| from the x columns of a solve CSV.
Rescore rescore_solve_csv(const Problem& p, const FieldParams& params, const CsvTable& table);

}  // namespace nlpflow
