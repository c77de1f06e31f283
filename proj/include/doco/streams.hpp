#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "doco/schedule.hpp"

namespace doco {

/// Signed-coin adversary along a fixed direction: g_t = L e_t u/||u|| with
/// fair signs e_t and L chosen so the realized discounted gradient variance
/// equals `budget` exactly. Requires budget in (0, lipschitz^2 * H_T].
struct RademacherSpec {
  std::vector<double> direction;  // u, nonzero
  double budget = 1.0;            // target discounted gradient variance
  double lipschitz = 1.0;         // admissible per-round gradient bound G
};

/// Nonstationary quantile stream: optimal radii drawn as |Normal(level_t,
/// noise_scale)| with the level either jumping every shift_period rounds
/// (sudden) or linearly interpolated across each period (gradual). Levels
/// cycle when the horizon outruns the list.
struct QuantileShiftSpec {
  enum class Mode { kSudden, kGradual };
  Mode mode = Mode::kSudden;
  std::int64_t shift_period = 500;
  std::vector<double> levels;
  double noise_scale = 0.0;
};

/// Piecewise-stationary convex stream: within each segment the loss is
/// scale * ||x - optimum|| (absolute distance in 1D), so gradients are bounded
/// by the segment's scale.
struct PiecewiseSegment {
  std::int64_t duration = 1;
  std::vector<double> optimum;
  double gradient_bound = 1.0;
};
struct PiecewiseLinearSpec {
  std::vector<PiecewiseSegment> segments;
};

struct StreamSpec {
  std::variant<RademacherSpec, QuantileShiftSpec, PiecewiseLinearSpec> kind;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
};

/// Pre-drawn gradient sequence (the signs are data-independent, so the whole
/// stream can be materialized up front).
struct RademacherStream {
  std::vector<std::vector<double>> gradients;
  double scale = 0.0;  // realized L
};
RademacherStream rademacher_stream(const StreamSpec& spec, const DiscountSchedule& schedule);

/// Optimal-radius sequence plus the realized ceiling. The ceiling is written
/// to the run ledger for bound evaluation only and must never reach a learner.
struct QuantileStream {
  std::vector<double> r_star;
  double ceiling = 0.0;  // max emitted r*
};
QuantileStream quantile_shift_stream(const StreamSpec& spec);

/// Per-round loss descriptors for the piecewise stream. Losses are evaluated
/// lazily against whatever point the learner plays.
struct DistanceLoss {
  std::vector<double> optimum;
  double scale = 1.0;

  double value(std::span<const double> x) const;
  std::vector<double> gradient(std::span<const double> x) const;
};
std::vector<DistanceLoss> piecewise_linear_stream(const StreamSpec& spec);

}  // namespace doco
