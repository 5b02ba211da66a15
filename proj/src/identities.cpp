#include "nlpflow/identities.hpp"

#include <cmath>

#include <fmt/format.h>

#include "nlpflow/cholesky.hpp"
#include "nlpflow/kkt.hpp"
#include "nlpflow/sampling.hpp"

namespace nlpflow {

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0; }

void add(std::vector<IdentityResult>& out, std::string name, double residual, double bound) {
  out.push_back({std::move(name), residual, bound, residual <= bound});
}

}  // namespace

std::vector<IdentityResult> check_identities(const Problem& p, const FieldParams& params,
                                             const Eigen::VectorXd& x, std::mt19937_64& rng,
                                             int quadratic_samples) {
  const FieldEval fe = field_eval(p, params, x);
  const double nF = fe.norm_F();
  std::vector<IdentityResult> out;

  add(out, "projector H^2 = H", max_abs(fe.H * fe.H - fe.H), 1e-10);
  add(out, "projector A H = 0", max_abs(fe.A * fe.H), 1e-10);
  add(out, "projector H A' = 0", max_abs(fe.H * fe.A.transpose()), 1e-10);

  std::normal_distribution<double> normal(0.0, 1.0);
  double quad = 0.0;
  double quad_bound = 1e-10;
  double quad_ratio = -1.0;
  for (int s = 0; s < quadratic_samples; ++s) {
    Eigen::VectorXd u(fe.H.rows());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
    const double gap = std::abs(u.dot(fe.H * u) - (fe.H * u).squaredNorm());
    const double bound = 1e-10 * (1.0 + u.squaredNorm());
    if (gap / bound > quad_ratio) {
      quad_ratio = gap / bound;
      quad = gap;
      quad_bound = bound;
    }
  }
  if (quadratic_samples > 0) add(out, "quadratic form u'Hu = |Hu|^2", quad, quad_bound);

  add(out, "tangency A F = 0", fe.A.rows() > 0 ? (fe.A * fe.F).norm() : 0.0, 1e-9 * (1.0 + nF));

  if (nF > 1e-6) {
    out.push_back({"descent rate < 0", fe.dissipation, 0.0, fe.dissipation < 0.0});
  }

  const KktReport certificate = kkt_report(p, fe, 1e-10);
  if (certificate.is_critical) add(out, "F = 0 at a KKT point", nF, 1e-8);
  if (certificate.worst() > 1e-3) out.push_back({"F != 0 off the KKT set", nF, 0.0, nF > 0.0});

  if (fe.g.size() > 0) {
    const Cholesky qf(fe.Q, "Q");
    const Eigen::VectorXd q_inv_w = qf.solve(fe.w);
    const Eigen::VectorXd predicted = fe.g.cwiseProduct(q_inv_w) - fe.r3.cwiseProduct(fe.vplus);
    add(out, "boundary rates B F", (fe.BF - predicted).norm(), 1e-9 * (1.0 + nF));

    double row_gap = 0.0;
    double row_ratio = -1.0;
    double row_bound = 0.0;
    for (Eigen::Index j = 0; j < fe.g.size(); ++j) {
      const double lhs = fe.B.row(j).dot(fe.F);
      const double rhs = fe.g[j] * fe.omega[j] - fe.r3[j] * fe.vplus[j];
      const double gap = std::abs(lhs - rhs);
      const double bound = 1e-9 * (1.0 + fe.B.row(j).norm() * nF);
      if (gap / bound > row_ratio) {
        row_ratio = gap / bound;
        row_gap = gap;
        row_bound = bound;
      }
    }
    add(out, "row rates grad g_j F = g_j omega_j - R3 v+", row_gap, row_bound);
  }

  add(out, "dissipation = grad theta F", std::abs(fe.dtheta_F - fe.dissipation),
      1e-9 * (1.0 + fe.grad_theta.norm() * nF));
  return out;
}

CriticalityCheck criticality_agreement(const Problem& p, const FieldParams& params, const Eigen::VectorXd& x) {
  const FieldEval fe = field_eval(p, params, x);
  const KktReport kkt = kkt_report(p, fe, 1e-4);
  CriticalityCheck c;
  c.norm_F = fe.norm_F();
  c.kkt_worst = kkt.worst();
  c.field_critical = c.norm_F <= 1e-6;
  c.kkt_critical = kkt.is_critical;
  if (c.field_critical == c.kkt_critical) {
    c.agreement = Agreement::agree;
  } else if (c.norm_F > 1e-8 && c.norm_F < 1e-4) {
    c.agreement = Agreement::gray;
  } else {
    c.agreement = Agreement::hard;
  }
  return c;
}

SuiteSummary run_invariant_suite(const StateSpace& space, const FieldParams& params, std::size_t samples,
                                 std::uint64_t seed) {
  const Problem& p = space.problem();
  params.validate(p.n(), p.k());
  const std::vector<Eigen::VectorXd> points = sample_feasible(space, samples, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  SuiteSummary summary;
  for (const Eigen::VectorXd& z : points) {
    const Eigen::VectorXd x = space.lift(z);
    ++summary.points;
    for (const IdentityResult& r : check_identities(p, params, x, rng)) {
      ++summary.checks;
      if (!r.ok) {
        ++summary.failures;
        summary.messages.push_back(
            fmt::format("point {}: {}: residual {:.3g} > bound {:.3g}", summary.points, r.name, r.residual, r.bound));
      }
    }
    const CriticalityCheck c = criticality_agreement(p, params, x);
    if (c.agreement == Agreement::gray) ++summary.gray;
    if (c.agreement == Agreement::hard) {
      ++summary.hard;
      summary.messages.push_back(fmt::format("point {}: |F| = {:.3g} but KKT residual {:.3g}", summary.points,
                                             c.norm_F, c.kkt_worst));
    }
  }
  return summary;
}

}  // namespace nlpflow
