#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace doco {

/// Discount-factor sequence lambda_t, t >= 0. The interaction protocol
/// reveals lambda_{t-1} inside round t; lambda_0 exists but multiplies empty
/// state, so every kind emits a strictly positive value at t = 0 as well.
class DiscountSchedule {
 public:
  enum class Kind { kConstant, kPiecewise, kRestart, kExplicit };

  static DiscountSchedule constant(double lambda);
  /// Segments of (first_index, value); the first segment must start at 0.
  static DiscountSchedule piecewise(std::vector<std::pair<std::int64_t, double>> segments);
  /// lambda_t = floor at the listed indices, 1 elsewhere. The floor stands in
  /// for an exact restart (lambda = 0 is outside the admissible range and
  /// would break the product-based equivalences).
  static DiscountSchedule restart(std::vector<std::int64_t> restart_indices,
                                  double floor = kDefaultFloor);
  /// values[t] = lambda_t; querying past the end throws.
  static DiscountSchedule explicit_sequence(std::vector<double> values);

  /// lambda_t for t >= 0; always in (0, inf).
  double lambda(std::int64_t t) const;

  Kind kind() const { return kind_; }
  double floor() const { return floor_; }

  static constexpr double kDefaultFloor = 1e-12;

 private:
  DiscountSchedule() = default;

  Kind kind_ = Kind::kConstant;
  double constant_ = 1.0;
  std::vector<std::pair<std::int64_t, double>> segments_;
  std::vector<std::int64_t> restarts_;
  std::vector<double> values_;
  double floor_ = kDefaultFloor;
};

/// Discounted running statistics of a gradient stream:
///   H_t = lambda^2 H_{t-1} + 1         (effective horizon)
///   V_t = lambda^2 V_{t-1} + |g_t|^2   (discounted gradient variance)
///   G_t = max(lambda G_{t-1}, |g_t|)   (discounted Lipschitz constant)
struct DiscountedMoments {
  double horizon = 0.0;
  double variance = 0.0;
  double lipschitz = 0.0;
};

DiscountedMoments update_moments(const DiscountedMoments& m, double g_norm, double lambda_prev);

/// H_t = sum_{i=1..t} prod_{j=i..t-1} lambda_j^2, computed incrementally.
/// Requires t >= 1.
double effective_horizon(const DiscountSchedule& schedule, std::int64_t t);

/// prod_{t=from..to-1} lambda_t. Empty range (from == to) yields 1; an
/// inverted range throws.
double forgetting_multiplier(const DiscountSchedule& schedule, std::int64_t from_index,
                             std::int64_t to_index);

}  // namespace doco
