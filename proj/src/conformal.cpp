#include "doco/conformal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace doco {

namespace {

void check_loss_args(double r, double r_star, double alpha, const char* who) {
  if (!std::isfinite(r) || !std::isfinite(r_star)) {
    throw std::domain_error(std::string(who) + ": arguments must be finite");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error(std::string(who) + ": alpha must lie in (0, 1)");
  }
}

}  // namespace

RadiusLossEval pinball_loss(double r, double r_star, double alpha) {
  check_loss_args(r, r_star, alpha, "pinball_loss");
  RadiusLossEval out;
  if (r > r_star) {
    out.value = alpha * (r - r_star);
    out.gradient = alpha;
  } else {
    out.value = (alpha - 1.0) * (r - r_star);
    out.gradient = alpha - 1.0;
  }
  return out;
}

RadiusLossEval skewed_quadratic_loss(double r, double r_star, double alpha) {
  check_loss_args(r, r_star, alpha, "skewed_quadratic_loss");
  const double coefficient = (r > r_star) ? alpha : 1.0 - alpha;
  const double diff = r - r_star;
  return {0.5 * coefficient * diff * diff, coefficient * diff};
}

ConformalState ConformalState::make(double eps) {
  return ConformalState{MagnitudeState::make(MagnitudeVariant::kDiscounted, eps)};
}

ConformalPrediction acp_predict(const ConformalState& state) {
  const MagnitudePrediction p = magnitude_predict(state.core);
  return {p.x, p.x_unprojected, p.saturated};
}

ConformalState acp_update(const ConformalState& state, double g_star, double lambda_prev) {
  auto [next, record] = magnitude_update(state.core, g_star, lambda_prev);
  if (record.g_tilde != record.g_clip) {
    // Would require a positive subgradient while the radius is pinned at 0,
    // i.e. r <= r*; no admitted radius loss produces that.
    throw std::logic_error("acp_update: surrogate-zeroing fired; g_star is not a valid "
                           "radius-loss subgradient at the current prediction");
  }
  return ConformalState{next};
}

double discounted_coverage_metric(std::span<const double> g_history,
                                  const DiscountSchedule& schedule, std::int64_t t) {
  if (t < 0 || static_cast<std::size_t>(t) > g_history.size()) {
    throw std::domain_error("discounted_coverage_metric: t outside recorded history");
  }
  double s = 0.0;
  for (std::int64_t i = 1; i <= t; ++i) {
    s = schedule.lambda(i - 1) * s - g_history[static_cast<std::size_t>(i - 1)];
  }
  return s;
}

double coverage_deviation_bound(double v_clip, double g_max, double ceiling, double eps) {
  if (v_clip < 0.0 || g_max < 0.0 || ceiling < 0.0 || !(eps > 0.0)) {
    throw std::domain_error("coverage_deviation_bound: invalid arguments");
  }
  const double log_term = 1.0 + std::sqrt(std::log(1.0 + 2.0 * ceiling / eps));
  return 2.0 * std::sqrt(v_clip) * log_term + 15.0 * g_max * log_term * log_term;
}

}  // namespace doco
