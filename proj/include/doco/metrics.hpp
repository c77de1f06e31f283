#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "doco/ledger.hpp"

namespace doco {

enum class RegretMode {
  kExactLoss,   // uses recorded loss values and the per-round loss specs
  kLinearized,  // uses <g_t, x_t - u>; an upper bound by convexity
};

/// Discounted regret sum_t (prod_{i=t..T-1} lambda_i) [l_t(x_t) - l_t(u)],
/// accumulated through the recurrence R_t = lambda_{t-1} R_{t-1} + d_t.
double discounted_regret(const RunLedger& ledger, std::span<const double> u, RegretMode mode);

/// Exponentially weighted comparator loss: the weight of round t is
/// prod_{i=t..T-1} lambda_i, normalized so the weights sum to one.
double comparator_window_loss(const RunLedger& ledger, std::span<const double> u);

/// Coverage statistics of a conformal run. Local series use forward windows
/// [t, t+k-1]; "width" for synthetic streams is the radius itself, which
/// orders the same way as the induced set size.
struct CoverageReport {
  double avg_coverage = 0.0;
  double avg_width = 0.0;
  double lce = 0.0;  // max over windows of |alpha - window miscoverage|
  std::vector<double> local_coverage;
  std::vector<double> local_width;
  // (1 - alpha) empirical quantile of the optimal radii per window: the best
  // fixed width a clairvoyant radius would have needed.
  std::vector<double> best_local_width;
};

CoverageReport coverage_metrics(const RunLedger& ledger, std::int64_t k, double alpha);

}  // namespace doco
