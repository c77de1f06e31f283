#include "doco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace doco {

double discounted_regret(const RunLedger& ledger, std::span<const double> u, RegretMode mode) {
  double regret = 0.0;
  for (const LedgerRound& round : ledger.rounds) {
    double diff = 0.0;
    if (mode == RegretMode::kLinearized) {
      if (u.size() != round.g.size() || u.size() != round.x.size()) {
        throw std::domain_error("discounted_regret: dimension mismatch");
      }
      for (std::size_t i = 0; i < u.size(); ++i) {
        diff += round.g[i] * (round.x[i] - u[i]);
      }
    } else {
      if (!round.loss_value.has_value()) {
        throw std::invalid_argument("discounted_regret: exact mode needs recorded losses");
      }
      diff = *round.loss_value - comparator_loss(round, u);
    }
    regret = round.lambda_prev * regret + diff;
  }
  return regret;
}

double comparator_window_loss(const RunLedger& ledger, std::span<const double> u) {
  if (ledger.rounds.empty()) {
    throw std::invalid_argument("comparator_window_loss: empty ledger");
  }
  double weighted = 0.0;
  double weight_mass = 0.0;
  for (const LedgerRound& round : ledger.rounds) {
    weighted = round.lambda_prev * weighted + comparator_loss(round, u);
    weight_mass = round.lambda_prev * weight_mass + 1.0;
  }
  return weighted / weight_mass;
}

CoverageReport coverage_metrics(const RunLedger& ledger, std::int64_t k, double alpha) {
  const std::int64_t horizon = static_cast<std::int64_t>(ledger.rounds.size());
  if (k < 1 || k > horizon) {
    throw std::domain_error("coverage_metrics: window must satisfy 1 <= k <= T");
  }
  std::vector<double> err(static_cast<std::size_t>(horizon));
  std::vector<double> width(static_cast<std::size_t>(horizon));
  std::vector<double> r_star(static_cast<std::size_t>(horizon));
  for (std::int64_t t = 0; t < horizon; ++t) {
    const LedgerRound& round = ledger.rounds[static_cast<std::size_t>(t)];
    if (!round.err.has_value() || !round.r_star.has_value() || round.x.size() != 1) {
      throw std::invalid_argument("coverage_metrics: ledger lacks conformal fields");
    }
    err[static_cast<std::size_t>(t)] = static_cast<double>(*round.err);
    width[static_cast<std::size_t>(t)] = round.x[0];
    r_star[static_cast<std::size_t>(t)] = *round.r_star;
  }

  CoverageReport report;
  double err_sum = 0.0;
  double width_sum = 0.0;
  for (std::int64_t t = 0; t < horizon; ++t) {
    err_sum += err[static_cast<std::size_t>(t)];
    width_sum += width[static_cast<std::size_t>(t)];
  }
  report.avg_coverage = 1.0 - err_sum / static_cast<double>(horizon);
  report.avg_width = width_sum / static_cast<double>(horizon);

  const std::int64_t windows = horizon - k + 1;
  report.local_coverage.reserve(static_cast<std::size_t>(windows));
  report.local_width.reserve(static_cast<std::size_t>(windows));
  report.best_local_width.reserve(static_cast<std::size_t>(windows));

  // Rolling sums over the forward window [t, t+k-1].
  double window_err = 0.0;
  double window_width = 0.0;
  for (std::int64_t t = 0; t < k; ++t) {
    window_err += err[static_cast<std::size_t>(t)];
    window_width += width[static_cast<std::size_t>(t)];
  }
  // Index of the order statistic giving the (1 - alpha) empirical quantile.
  const std::int64_t q_rank = std::min<std::int64_t>(
      k - 1, static_cast<std::int64_t>(std::ceil((1.0 - alpha) * static_cast<double>(k))) - 1);
  std::vector<double> window_rstar(static_cast<std::size_t>(k));
  for (std::int64_t t = 0; t < windows; ++t) {
    report.local_coverage.push_back(1.0 - window_err / static_cast<double>(k));
    report.local_width.push_back(window_width / static_cast<double>(k));
    report.lce = std::max(report.lce, std::abs(alpha - window_err / static_cast<double>(k)));

    std::copy(r_star.begin() + t, r_star.begin() + t + k, window_rstar.begin());
    std::nth_element(window_rstar.begin(), window_rstar.begin() + q_rank, window_rstar.end());
    report.best_local_width.push_back(window_rstar[static_cast<std::size_t>(q_rank)]);

    if (t + k < horizon) {
      window_err += err[static_cast<std::size_t>(t + k)] - err[static_cast<std::size_t>(t)];
      window_width += width[static_cast<std::size_t>(t + k)] - width[static_cast<std::size_t>(t)];
    }
  }
  return report;
}

}  // namespace doco
