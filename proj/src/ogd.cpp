#include "doco/ogd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace doco {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

void require_finite(std::span<const double> g, const char* who) {
  for (double x : g) {
    if (!std::isfinite(x)) {
      throw std::domain_error(std::string(who) + ": components must be finite");
    }
  }
}

}  // namespace

OgdDomain OgdDomain::unconstrained() { return OgdDomain{}; }

OgdDomain OgdDomain::interval(double lo, double hi) {
  if (!(lo <= hi)) {
    throw std::invalid_argument("OgdDomain::interval: lo must not exceed hi");
  }
  OgdDomain d;
  d.kind = Kind::kInterval;
  d.lo = lo;
  d.hi = hi;
  return d;
}

OgdDomain OgdDomain::ball(std::vector<double> center, double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("OgdDomain::ball: radius must be positive");
  }
  OgdDomain d;
  d.kind = Kind::kBall;
  d.center = std::move(center);
  d.radius = radius;
  return d;
}

std::vector<double> OgdDomain::project(std::vector<double> x) const {
  switch (kind) {
    case Kind::kUnconstrained:
      return x;
    case Kind::kInterval:
      for (double& c : x) {
        c = std::clamp(c, lo, hi);
      }
      return x;
    case Kind::kBall: {
      if (x.size() != center.size()) {
        throw std::domain_error("OgdDomain::project: dimension mismatch");
      }
      double dist2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - center[i];
        dist2 += d * d;
      }
      const double dist = std::sqrt(dist2);
      if (dist > radius) {
        const double scale = radius / dist;
        for (std::size_t i = 0; i < x.size(); ++i) {
          x[i] = center[i] + (x[i] - center[i]) * scale;
        }
      }
      return x;
    }
  }
  throw std::logic_error("OgdDomain::project: unreachable");
}

double OgdDomain::diameter() const {
  switch (kind) {
    case Kind::kUnconstrained:
      return std::numeric_limits<double>::infinity();
    case Kind::kInterval:
      return hi - lo;
    case Kind::kBall:
      return 2.0 * radius;
  }
  throw std::logic_error("OgdDomain::diameter: unreachable");
}

OgdRule OgdRule::constant_lr(double diameter, double lipschitz, double lambda) {
  if (!(diameter > 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument("OgdRule::constant_lr: D and G must be positive");
  }
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("OgdRule::constant_lr: lambda must lie in (0, 1)");
  }
  OgdRule r;
  r.kind = Kind::kConstant;
  r.diameter = diameter;
  r.lipschitz = lipschitz;
  r.lambda = lambda;
  return r;
}

OgdRule OgdRule::horizon(double diameter, double lipschitz) {
  if (!(diameter > 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument("OgdRule::horizon: D and G must be positive");
  }
  OgdRule r;
  r.kind = Kind::kHorizon;
  r.diameter = diameter;
  r.lipschitz = lipschitz;
  return r;
}

OgdRule OgdRule::adagrad(double diameter) {
  if (!(diameter > 0.0)) {
    throw std::invalid_argument("OgdRule::adagrad: D must be positive");
  }
  OgdRule r;
  r.kind = Kind::kAdaGrad;
  r.diameter = diameter;
  return r;
}

OgdRule OgdRule::simple(double lr_scale) {
  if (!(lr_scale > 0.0)) {
    throw std::invalid_argument("OgdRule::simple: learning-rate scale must be positive");
  }
  OgdRule r;
  r.kind = Kind::kSimple;
  r.diameter = lr_scale;
  return r;
}

OgdState OgdState::make(OgdRule rule, OgdDomain domain, std::vector<double> x0) {
  OgdState st;
  st.x = domain.project(std::move(x0));
  st.domain = std::move(domain);
  st.rule = rule;
  return st;
}

OgdState ogd_step(const OgdState& state, std::span<const double> g, double lambda_prev) {
  if (g.size() != state.x.size()) {
    throw std::domain_error("ogd_step: dimension mismatch");
  }
  require_finite(g, "ogd_step");
  if (state.rule.kind == OgdRule::Kind::kConstant && lambda_prev != state.rule.lambda) {
    throw std::invalid_argument("ogd_step: constant-LR rule requires its tuning lambda");
  }

  OgdState next = state;
  next.moments = update_moments(state.moments, std::sqrt(dot(g, g)), lambda_prev);

  double eta = 0.0;
  switch (state.rule.kind) {
    case OgdRule::Kind::kConstant:
      eta = state.rule.diameter / state.rule.lipschitz *
            std::sqrt(1.0 - state.rule.lambda * state.rule.lambda);
      break;
    case OgdRule::Kind::kHorizon:
      eta = state.rule.diameter / state.rule.lipschitz / std::sqrt(next.moments.horizon);
      break;
    case OgdRule::Kind::kAdaGrad:
    case OgdRule::Kind::kSimple:
      if (next.moments.variance == 0.0) {
        return next;  // hold position until the first nonzero gradient
      }
      eta = state.rule.diameter / std::sqrt(next.moments.variance);
      break;
  }

  std::vector<double> stepped(state.x.size());
  for (std::size_t i = 0; i < stepped.size(); ++i) {
    stepped[i] = state.x[i] - eta * g[i];
  }
  next.x = state.domain.project(std::move(stepped));
  return next;
}

std::vector<double> l2_regularized_ogd_step(std::span<const double> x,
                                            std::span<const double> g, double eta,
                                            double gamma) {
  if (x.size() != g.size()) {
    throw std::domain_error("l2_regularized_ogd_step: dimension mismatch");
  }
  const double shrink = 1.0 - eta * gamma;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = shrink * x[i] - eta * g[i];
  }
  return out;
}

LinearFtrlResult linear_ftrl_step(std::span<const double> sum, std::span<const double> g,
                                  double lambda, double c) {
  if (sum.size() != g.size()) {
    throw std::domain_error("linear_ftrl_step: dimension mismatch");
  }
  LinearFtrlResult out;
  out.sum.resize(sum.size());
  out.prediction.resize(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    out.sum[i] = lambda * sum[i] + g[i];
    out.prediction[i] = -c * out.sum[i];
  }
  return out;
}

double constant_lr_regret_bound(double diameter, double lipschitz, double lambda) {
  return 1.5 * diameter * lipschitz / std::sqrt(1.0 - lambda * lambda);
}

double horizon_ogd_regret_bound(double diameter, double lipschitz, double horizon) {
  return 1.5 * diameter * lipschitz * std::sqrt(horizon);
}

double adagrad_regret_bound(double diameter, double variance) {
  return 1.5 * diameter * std::sqrt(variance);
}

}  // namespace doco
