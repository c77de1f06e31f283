#include "doco/streams.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doco/rng.hpp"

namespace doco {

RademacherStream rademacher_stream(const StreamSpec& spec, const DiscountSchedule& schedule) {
  const auto* rad = std::get_if<RademacherSpec>(&spec.kind);
  if (rad == nullptr) {
    throw std::invalid_argument("rademacher_stream: spec kind mismatch");
  }
  if (spec.horizon < 1) {
    throw std::domain_error("rademacher_stream: horizon must be >= 1");
  }
  double u_norm2 = 0.0;
  for (double c : rad->direction) {
    u_norm2 += c * c;
  }
  if (!(u_norm2 > 0.0)) {
    throw std::domain_error("rademacher_stream: direction must be nonzero");
  }
  const double horizon_mass = effective_horizon(schedule, spec.horizon);
  const double max_budget = rad->lipschitz * rad->lipschitz * horizon_mass;
  if (!(rad->budget > 0.0) || rad->budget > max_budget * (1.0 + 1e-12)) {
    throw std::domain_error("rademacher_stream: budget must lie in (0, G^2 H_T]");
  }

  RademacherStream out;
  out.scale = std::sqrt(rad->budget / horizon_mass);
  const double u_norm = std::sqrt(u_norm2);
  CounterRng rng(spec.seed, /*stream=*/1);
  out.gradients.reserve(static_cast<std::size_t>(spec.horizon));
  for (std::int64_t t = 0; t < spec.horizon; ++t) {
    const double sign = rng.next_sign();
    std::vector<double> g(rad->direction.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = out.scale * sign * rad->direction[i] / u_norm;
    }
    out.gradients.push_back(std::move(g));
  }
  return out;
}

QuantileStream quantile_shift_stream(const StreamSpec& spec) {
  const auto* qs = std::get_if<QuantileShiftSpec>(&spec.kind);
  if (qs == nullptr) {
    throw std::invalid_argument("quantile_shift_stream: spec kind mismatch");
  }
  if (spec.horizon < 1 || qs->shift_period < 1 || qs->levels.empty()) {
    throw std::domain_error("quantile_shift_stream: need horizon >= 1, period >= 1, levels");
  }
  if (qs->noise_scale < 0.0) {
    throw std::domain_error("quantile_shift_stream: noise_scale must be >= 0");
  }

  QuantileStream out;
  out.r_star.reserve(static_cast<std::size_t>(spec.horizon));
  CounterRng rng(spec.seed, /*stream=*/2);
  const std::size_t n_levels = qs->levels.size();
  for (std::int64_t t = 0; t < spec.horizon; ++t) {
    const std::size_t segment = static_cast<std::size_t>(t / qs->shift_period);
    double level = qs->levels[segment % n_levels];
    if (qs->mode == QuantileShiftSpec::Mode::kGradual) {
      const double frac =
          static_cast<double>(t % qs->shift_period) / static_cast<double>(qs->shift_period);
      const double next = qs->levels[(segment + 1) % n_levels];
      level = level + frac * (next - level);
    }
    const double r = std::abs(rng.next_normal(level, qs->noise_scale));
    out.r_star.push_back(r);
    out.ceiling = std::max(out.ceiling, r);
  }
  return out;
}

double DistanceLoss::value(std::span<const double> x) const {
  if (x.size() != optimum.size()) {
    throw std::domain_error("DistanceLoss::value: dimension mismatch");
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - optimum[i];
    d2 += d * d;
  }
  return scale * std::sqrt(d2);
}

std::vector<double> DistanceLoss::gradient(std::span<const double> x) const {
  if (x.size() != optimum.size()) {
    throw std::domain_error("DistanceLoss::gradient: dimension mismatch");
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - optimum[i];
    d2 += d * d;
  }
  std::vector<double> g(x.size(), 0.0);
  const double dist = std::sqrt(d2);
  if (dist > 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      g[i] = scale * (x[i] - optimum[i]) / dist;
    }
  }
  return g;  // subgradient 0 at the optimum
}

std::vector<DistanceLoss> piecewise_linear_stream(const StreamSpec& spec) {
  const auto* pw = std::get_if<PiecewiseLinearSpec>(&spec.kind);
  if (pw == nullptr) {
    throw std::invalid_argument("piecewise_linear_stream: spec kind mismatch");
  }
  if (spec.horizon < 1 || pw->segments.empty()) {
    throw std::domain_error("piecewise_linear_stream: need horizon >= 1 and segments");
  }
  for (const PiecewiseSegment& seg : pw->segments) {
    if (seg.duration < 1 || seg.optimum.size() != pw->segments.front().optimum.size()) {
      throw std::domain_error("piecewise_linear_stream: segments need duration >= 1 and a "
                              "common dimension");
    }
  }
  std::vector<DistanceLoss> out;
  out.reserve(static_cast<std::size_t>(spec.horizon));
  std::size_t seg = 0;
  std::int64_t remaining = pw->segments[0].duration;
  for (std::int64_t t = 0; t < spec.horizon; ++t) {
    while (remaining <= 0) {
      seg = (seg + 1) % pw->segments.size();
      remaining = pw->segments[seg].duration;
    }
    out.push_back(DistanceLoss{pw->segments[seg].optimum, pw->segments[seg].gradient_bound});
    --remaining;
  }
  return out;
}

}  // namespace doco
