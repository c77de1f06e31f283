#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "doco/magnitude_learner.hpp"
#include "doco/schedule.hpp"

namespace doco {

/// Loss value and (sub)gradient of a radius loss at radius r against the
/// revealed optimal radius r_star.
struct RadiusLossEval {
  double value = 0.0;
  double gradient = 0.0;
};

/// Pinball loss at miscoverage target alpha:
///   alpha (r - r*)       if r >  r*,
///   (alpha - 1)(r - r*)  otherwise,
/// with subgradient alpha above r* and alpha - 1 at or below it (the
/// convention at the kink encodes miscoverage).
RadiusLossEval pinball_loss(double r, double r_star, double alpha);

/// Quadratic penalty on the under/over-coverage margin,
/// (1/2) |alpha - 1[r <= r*]| (r - r*)^2. Convex, minimized at r*, zero
/// gradient there, and not globally Lipschitz.
RadiusLossEval skewed_quadratic_loss(double r, double r_star, double alpha);

/// Radius learner for online conformal prediction. Internally this is the
/// discounted magnitude learner run on radius-loss subgradients; the problem
/// structure guarantees the surrogate-zeroing branch can never fire, and the
/// update checks that claim on every round instead of removing the branch.
/// The stream's radius ceiling is never an input: agnosticism to it is the
/// point of the construction.
struct ConformalState {
  MagnitudeState core;

  static ConformalState make(double eps = 1.0);

  double s_clip() const { return core.s; }
  double v_clip() const { return core.v; }
  double g_max() const { return core.h; }
  bool saturated() const { return core.saturated; }
};

struct ConformalPrediction {
  double r = 0.0;
  double r_unprojected = 0.0;
  bool saturated = false;
};

ConformalPrediction acp_predict(const ConformalState& state);

/// Fold one subgradient into the clipped statistics. `g_star` must be a
/// subgradient of an admitted radius loss at the current prediction; the
/// update throws std::logic_error if the surrogate-zeroing condition fires,
/// which can only happen when that contract is broken.
ConformalState acp_update(const ConformalState& state, double g_star, double lambda_prev);

/// Discounted negated subgradient sum S*_t = -sum_i (prod_j lambda_j) g*_i,
/// the sliding-window coverage deviation. Maintained by the recurrence
/// S' = lambda * S - g.
double discounted_coverage_metric(std::span<const double> g_history,
                                  const DiscountSchedule& schedule, std::int64_t t);

/// Coverage-deviation envelope for a stream whose optimal radii never exceed
/// `ceiling`: 2 sqrt(V*_clip) (1 + sqrt(log(1 + 2 ceiling/eps)))
///            + 15 G* (1 + sqrt(log(1 + 2 ceiling/eps)))^2.
double coverage_deviation_bound(double v_clip, double g_max, double ceiling, double eps);

}  // namespace doco
