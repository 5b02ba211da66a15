#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nlpflow/field.hpp"
#include "nlpflow/state_space.hpp"

namespace nlpflow {

struct IdentityResult {
  std::string name;
  double residual = 0.0;
  double bound = 0.0;
  bool ok = true;
};

/// Structural checks of the field at one feasible point:
///   projector: H^2 = H, A H = 0, H A' = 0            (1e-10)
///   quadratic: u'H u = |H u|^2 for random u          (1e-10 (1 + |u|^2))
///   tangency:  |A F| <= 1e-9 (1 + |F|)
///   descent:   dissipation < 0 when |F| > 1e-6
///   zeros:     |F| <= 1e-8 at a KKT point; |F| > 0 when the KKT residual > 1e-3
///   boundary:  |B F - (diag(g) Q^-1 w - R3 v+)| <= 1e-9 (1 + |F|)
///   rate:      grad theta F == dissipation to 1e-9 (1 + |grad theta||F|)
///   rows:      grad g_j F == g_j omega_j - R3_j v_j+ to 1e-9 (1 + |grad g_j||F|)
std::vector<IdentityResult> check_identities(const Problem& p, const FieldParams& params,
                                             const Eigen::VectorXd& x, std::mt19937_64& rng,
                                             int quadratic_samples = 4);

enum class Agreement { agree, gray, hard };

struct CriticalityCheck {
  double norm_F = 0.0;
  double kkt_worst = 0.0;
  bool field_critical = false;  // |F| <= 1e-6
  bool kkt_critical = false;    // KKT residuals <= 1e-4
  Agreement agreement = Agreement::agree;
};

/// Compares |F| <= 1e-6 with the KKT residual test at 1e-4. Disagreements
/// with |F| in (1e-8, 1e-4) are `gray`, others `hard`.
CriticalityCheck criticality_agreement(const Problem& p, const FieldParams& params, const Eigen::VectorXd& x);

struct SuiteSummary {
  std::size_t points = 0;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::size_t gray = 0;
  std::size_t hard = 0;
  std::vector<std::string> messages;  // one per failure or hard disagreement

  bool passed() const { return failures == 0 && hard == 0; }
};

/// check_identities and criticality_agreement at `samples` seeded feasible
/// points of `space`, evaluated on the full problem.
SuiteSummary run_invariant_suite(const StateSpace& space, const FieldParams& params, std::size_t samples,
                                 std::uint64_t seed);

}  // namespace nlpflow
