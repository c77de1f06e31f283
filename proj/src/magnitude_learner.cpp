#include "doco/magnitude_learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doco/special_math.hpp"

namespace doco {

MagnitudeState MagnitudeState::make(MagnitudeVariant variant, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("MagnitudeState: eps must be positive and finite");
  }
  if (variant == MagnitudeVariant::kHintFree) {
    return make_hint_free(eps);
  }
  MagnitudeState st;
  st.eps = eps;
  st.variant = variant;
  return st;
}

MagnitudeState MagnitudeState::make_hint_free(double eps, double v0) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("MagnitudeState: eps must be positive and finite");
  }
  if (!(v0 > 0.0)) {
    throw std::invalid_argument("MagnitudeState: hint-free variant needs v0 > 0");
  }
  MagnitudeState st;
  st.eps = eps;
  st.v = v0;
  st.variant = MagnitudeVariant::kHintFree;
  return st;
}

MagnitudePrediction magnitude_predict(const MagnitudeState& state) {
  MagnitudePrediction out;
  if (state.variant == MagnitudeVariant::kHintFree) {
    double z = state.s / (2.0 * std::sqrt(state.v));
    if (std::abs(z) > kMaxErfiArg) {
      z = std::copysign(kMaxErfiArg, z);
      out.saturated = true;
    }
    out.x_unprojected = state.eps * erfi(z);
    out.x = std::max(out.x_unprojected, 0.0);
    return out;
  }

  if (state.h == 0.0) {
    return out;  // x = 0 until the first gradient establishes a hint
  }

  const double radicand = state.v + 2.0 * state.h * state.s + 16.0 * state.h * state.h;
  if (!(radicand > 0.0)) {
    throw std::domain_error("magnitude_predict: nonpositive radicand");
  }
  const double root = std::sqrt(radicand);
  double z = state.s / (2.0 * root);
  if (std::abs(z) > kMaxErfiArg) {
    // The same clamp bounds both the erfi argument and the exp exponent z^2.
    z = std::copysign(kMaxErfiArg, z);
    out.saturated = true;
  }
  const double exp_term = std::exp(z * z);
  out.x_unprojected = state.eps * erfi(z) - state.eps * state.h / root * exp_term;
  out.x = std::max(out.x_unprojected, 0.0);
  return out;
}

namespace {

// Radicand floor along valid trajectories: v + 2hs + h^2 >= 0, i.e. the
// prediction radicand stays >= 15 h^2. Violations mean the state was driven
// outside the update contract (e.g. a hinted learner fed oversized
// gradients), which would silently corrupt later predictions.
void check_radicand_floor(const MagnitudeState& st) {
  if (st.variant == MagnitudeVariant::kHintFree || st.h <= 0.0) {
    return;
  }
  const double lhs = st.v + 2.0 * st.h * st.s + st.h * st.h;
  const double scale = st.v + 2.0 * st.h * std::abs(st.s) + st.h * st.h;
  if (lhs < -1e-9 * scale) {
    throw std::logic_error("magnitude_update: radicand floor violated");
  }
}

}  // namespace

std::pair<MagnitudeState, MagnitudeUpdateRecord> magnitude_update(
    const MagnitudeState& state, double g, double lambda_prev, std::optional<double> hint) {
  if (!std::isfinite(g)) {
    throw std::domain_error("magnitude_update: gradient must be finite");
  }
  if (!(lambda_prev > 0.0) || !std::isfinite(lambda_prev)) {
    throw std::domain_error("magnitude_update: lambda must lie in (0, inf)");
  }
  const bool hinted = state.variant == MagnitudeVariant::kHinted;
  if (hint.has_value() && !hinted) {
    throw std::invalid_argument("magnitude_update: hint only legal for the hinted variant");
  }
  if (hinted && (!hint.has_value() || !(*hint >= 0.0))) {
    throw std::invalid_argument("magnitude_update: hinted variant needs a nonnegative hint");
  }
  if (state.variant == MagnitudeVariant::kUndiscounted && lambda_prev != 1.0) {
    throw std::invalid_argument("magnitude_update: undiscounted variant requires lambda == 1");
  }

  const MagnitudePrediction pred = magnitude_predict(state);

  MagnitudeUpdateRecord rec;
  rec.g = g;
  rec.x_unprojected = pred.x_unprojected;
  rec.x = pred.x;
  rec.lambda_prev = lambda_prev;

  MagnitudeState next = state;
  next.saturated = state.saturated || pred.saturated;

  switch (state.variant) {
    case MagnitudeVariant::kDiscounted:
    case MagnitudeVariant::kUndiscounted: {
      const double clip_range = lambda_prev * state.h;
      rec.g_clip = std::clamp(g, -clip_range, clip_range);
      next.h = std::max(clip_range, std::abs(g));
      break;
    }
    case MagnitudeVariant::kHintFree:
      rec.g_clip = g;
      break;
    case MagnitudeVariant::kHinted:
      rec.g_clip = g;
      next.h = *hint;
      break;
  }

  // Surrogate rule: drop the gradient only when it would push the already
  // negative unprojected iterate further below the domain.
  rec.g_tilde = (rec.g_clip * pred.x_unprojected < rec.g_clip * pred.x) ? 0.0 : rec.g_clip;

  next.v = lambda_prev * lambda_prev * state.v + rec.g_tilde * rec.g_tilde;
  next.s = lambda_prev * state.s - rec.g_tilde;

  check_radicand_floor(next);
  return {next, rec};
}

double magnitude_regret_bound(const MagnitudeBoundArgs& args) {
  if (args.variance < 0.0 || args.lipschitz < 0.0 || args.comparator < 0.0 ||
      !(args.eps > 0.0) || args.tau < 1) {
    throw std::domain_error("magnitude_regret_bound: invalid arguments");
  }
  const double v = args.variance;
  const double g = args.lipschitz;
  const double u = args.comparator;
  const double log_term = 1.0 + std::sqrt(std::log(2.0 * u / args.eps + 1.0));
  const double s = 8.0 * g * log_term * log_term +
                   2.0 * std::sqrt(v + 16.0 * g * g) * log_term;
  return args.eps * std::sqrt(v + 2.0 * g * s + 16.0 * g * g) + u * (s + g) +
         args.max_x_recent * g + args.forgetting * args.max_x_old * args.lipschitz_old;
}

}  // namespace doco
