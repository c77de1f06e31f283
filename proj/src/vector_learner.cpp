#include "doco/vector_learner.hpp"

#include <cmath>
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

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void require_finite(std::span<const double> g, const char* who) {
  for (double x : g) {
    if (!std::isfinite(x)) {
      throw std::domain_error(std::string(who) + ": gradient components must be finite");
    }
  }
}

}  // namespace

BallLearnerState ball_step(const BallLearnerState& state, std::span<const double> g,
                           double lambda_prev) {
  if (g.size() != state.w.size()) {
    throw std::domain_error("ball_step: dimension mismatch");
  }
  require_finite(g, "ball_step");
  if (!(lambda_prev > 0.0) || !std::isfinite(lambda_prev)) {
    throw std::domain_error("ball_step: lambda must lie in (0, inf)");
  }

  BallLearnerState next = state;
  next.variance = lambda_prev * lambda_prev * state.variance + dot(g, g);
  if (next.variance == 0.0) {
    return next;  // no information yet; step size undefined
  }
  const double step = 2.0 / std::sqrt(next.variance);
  for (std::size_t i = 0; i < next.w.size(); ++i) {
    next.w[i] = state.w[i] - step * g[i];
  }
  const double w_norm = norm(next.w);
  if (w_norm > 1.0) {
    for (double& c : next.w) {
      c /= w_norm;
    }
  }
  return next;
}

VectorLearnerState VectorLearnerState::make(std::size_t dim, double eps,
                                            std::vector<double> bias) {
  if (dim == 0) {
    throw std::invalid_argument("VectorLearnerState: dimension must be positive");
  }
  if (!bias.empty() && bias.size() != dim) {
    throw std::invalid_argument("VectorLearnerState: bias dimension mismatch");
  }
  if (bias.empty()) {
    bias.assign(dim, 0.0);
  }
  VectorLearnerState st{MagnitudeState::make(MagnitudeVariant::kHinted, eps),
                        BallLearnerState(dim), 0.0, std::move(bias)};
  return st;
}

std::vector<double> vector_predict(const VectorLearnerState& state) {
  const double y = magnitude_predict(state.magnitude).x;
  std::vector<double> x(state.ball.w.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = state.bias[i] + state.ball.w[i] * y;
  }
  return x;
}

VectorLearnerState vector_update(const VectorLearnerState& state, std::span<const double> g,
                                 double lambda_prev) {
  if (g.size() != state.ball.w.size()) {
    throw std::domain_error("vector_update: dimension mismatch");
  }
  require_finite(g, "vector_update");

  const double g_norm = norm(g);
  const double decayed_hint = lambda_prev * state.h;
  const double new_hint = std::max(decayed_hint, g_norm);

  std::vector<double> g_clip(g.size(), 0.0);
  if (new_hint > 0.0) {
    const double scale = decayed_hint / new_hint;  // <= 1, so ||g_clip|| <= lambda*h
    for (std::size_t i = 0; i < g.size(); ++i) {
      g_clip[i] = g[i] * scale;
    }
  }

  VectorLearnerState next = state;
  next.h = new_hint;
  const double scalar_g = dot(g_clip, state.ball.w);
  next.magnitude = magnitude_update(state.magnitude, scalar_g, lambda_prev, new_hint).first;
  next.ball = ball_step(state.ball, g_clip, lambda_prev);
  return next;
}

}  // namespace doco
