#include "doco/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace doco {

namespace {

void require_positive(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::domain_error("DiscountSchedule: discount factors must lie in (0, inf)");
  }
}

}  // namespace

DiscountSchedule DiscountSchedule::constant(double lambda) {
  require_positive(lambda);
  DiscountSchedule s;
  s.kind_ = Kind::kConstant;
  s.constant_ = lambda;
  return s;
}

DiscountSchedule DiscountSchedule::piecewise(
    std::vector<std::pair<std::int64_t, double>> segments) {
  if (segments.empty() || segments.front().first != 0) {
    throw std::invalid_argument("DiscountSchedule::piecewise: first segment must start at 0");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    require_positive(segments[i].second);
    if (i > 0 && segments[i].first <= segments[i - 1].first) {
      throw std::invalid_argument("DiscountSchedule::piecewise: starts must increase");
    }
  }
  DiscountSchedule s;
  s.kind_ = Kind::kPiecewise;
  s.segments_ = std::move(segments);
  return s;
}

DiscountSchedule DiscountSchedule::restart(std::vector<std::int64_t> restart_indices,
                                           double floor) {
  if (!(floor > 0.0)) {
    throw std::invalid_argument("DiscountSchedule::restart: floor must be positive");
  }
  DiscountSchedule s;
  s.kind_ = Kind::kRestart;
  s.restarts_ = std::move(restart_indices);
  std::sort(s.restarts_.begin(), s.restarts_.end());
  s.floor_ = floor;
  return s;
}

DiscountSchedule DiscountSchedule::explicit_sequence(std::vector<double> values) {
  for (double v : values) {
    require_positive(v);
  }
  DiscountSchedule s;
  s.kind_ = Kind::kExplicit;
  s.values_ = std::move(values);
  return s;
}

double DiscountSchedule::lambda(std::int64_t t) const {
  if (t < 0) {
    throw std::domain_error("DiscountSchedule::lambda: negative index");
  }
  switch (kind_) {
    case Kind::kConstant:
      return constant_;
    case Kind::kPiecewise: {
      double value = segments_.front().second;
      for (const auto& [start, v] : segments_) {
        if (start > t) {
          break;
        }
        value = v;
      }
      return value;
    }
    case Kind::kRestart:
      return std::binary_search(restarts_.begin(), restarts_.end(), t) ? floor_ : 1.0;
    case Kind::kExplicit:
      if (static_cast<std::size_t>(t) >= values_.size()) {
        throw std::domain_error("DiscountSchedule::lambda: index past explicit sequence");
      }
      return values_[static_cast<std::size_t>(t)];
  }
  throw std::logic_error("DiscountSchedule::lambda: unreachable");
}

DiscountedMoments update_moments(const DiscountedMoments& m, double g_norm, double lambda_prev) {
  if (!(g_norm >= 0.0) || !std::isfinite(g_norm)) {
    throw std::domain_error("update_moments: gradient norm must be finite and nonnegative");
  }
  if (!(lambda_prev > 0.0) || !std::isfinite(lambda_prev)) {
    throw std::domain_error("update_moments: lambda must lie in (0, inf)");
  }
  DiscountedMoments out;
  const double l2 = lambda_prev * lambda_prev;
  out.horizon = l2 * m.horizon + 1.0;
  out.variance = l2 * m.variance + g_norm * g_norm;
  out.lipschitz = std::max(lambda_prev * m.lipschitz, g_norm);
  return out;
}

double effective_horizon(const DiscountSchedule& schedule, std::int64_t t) {
  if (t < 1) {
    throw std::domain_error("effective_horizon: round index must be >= 1");
  }
  double h = 1.0;  // H_1
  for (std::int64_t i = 2; i <= t; ++i) {
    const double lam = schedule.lambda(i - 1);
    h = lam * lam * h + 1.0;
  }
  return h;
}

double forgetting_multiplier(const DiscountSchedule& schedule, std::int64_t from_index,
                             std::int64_t to_index) {
  if (from_index > to_index) {
    throw std::domain_error("forgetting_multiplier: inverted range");
  }
  double prod = 1.0;
  for (std::int64_t t = from_index; t < to_index; ++t) {
    prod *= schedule.lambda(t);
  }
  return prod;
}

}  // namespace doco
