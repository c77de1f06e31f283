#include "doco/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <thread>

#include "doco/conformal.hpp"
#include "doco/magnitude_learner.hpp"
#include "doco/ogd.hpp"
#include "doco/rng.hpp"
#include "doco/vector_learner.hpp"

namespace doco {

namespace {

double vec_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double c : v) {
    acc += c * c;
  }
  return std::sqrt(acc);
}

bool is_conformal_env(const StreamSpec& env) {
  return std::holds_alternative<QuantileShiftSpec>(env.kind);
}

std::size_t environment_dim(const StreamSpec& env) {
  if (const auto* rad = std::get_if<RademacherSpec>(&env.kind)) {
    return rad->direction.size();
  }
  if (const auto* pw = std::get_if<PiecewiseLinearSpec>(&env.kind)) {
    return pw->segments.empty() ? 1 : pw->segments.front().optimum.size();
  }
  return 1;
}

// Uniform round-by-round interface the protocol loop drives.
class RoundLearner {
 public:
  virtual ~RoundLearner() = default;
  virtual std::vector<double> predict() = 0;
  virtual void update(std::span<const double> g, double lambda_prev) = 0;
  // Undiscounted algorithms play the unit-discount game regardless of the
  // configured schedule; the ledger records what they actually consumed.
  virtual bool unit_discount() const { return false; }
};

class ScalarRunner final : public RoundLearner {
 public:
  ScalarRunner(MagnitudeState state, bool unit) : state_(state), unit_(unit) {}

  std::vector<double> predict() override { return {magnitude_predict(state_).x}; }

  void update(std::span<const double> g, double lambda_prev) override {
    state_ = magnitude_update(state_, g[0], lambda_prev).first;
  }

  bool unit_discount() const override { return unit_; }

 private:
  MagnitudeState state_;
  bool unit_;
};

// Conformal radius learner with the zeroing contract checked on every round.
class ConformalRunner final : public RoundLearner {
 public:
  ConformalRunner(double eps, bool unit) : state_(ConformalState::make(eps)), unit_(unit) {}

  std::vector<double> predict() override { return {acp_predict(state_).r}; }

  void update(std::span<const double> g, double lambda_prev) override {
    state_ = acp_update(state_, g[0], lambda_prev);
  }

  bool unit_discount() const override { return unit_; }

 private:
  ConformalState state_;
  bool unit_;
};

class VectorRunner final : public RoundLearner {
 public:
  VectorRunner(std::size_t dim, double eps, std::vector<double> bias)
      : state_(VectorLearnerState::make(dim, eps, std::move(bias))) {}

  std::vector<double> predict() override { return vector_predict(state_); }

  void update(std::span<const double> g, double lambda_prev) override {
    state_ = vector_update(state_, g, lambda_prev);
  }

 private:
  VectorLearnerState state_;
};

class OgdRunner final : public RoundLearner {
 public:
  OgdRunner(OgdState state, bool unit) : state_(std::move(state)), unit_(unit) {}

  std::vector<double> predict() override { return state_.x; }

  void update(std::span<const double> g, double lambda_prev) override {
    state_ = ogd_step(state_, g, lambda_prev);
  }

  bool unit_discount() const override { return unit_; }

 private:
  OgdState state_;
  bool unit_;
};

OgdDomain domain_from_spec(const LearnerSpec& spec, bool conformal, std::size_t dim) {
  std::string kind = spec.domain;
  if (kind == "default") {
    kind = conformal ? "halfline" : "unconstrained";
  }
  if (kind == "unconstrained") {
    return OgdDomain::unconstrained();
  }
  if (kind == "halfline") {
    return OgdDomain::interval(0.0, std::numeric_limits<double>::infinity());
  }
  if (kind == "interval") {
    return OgdDomain::interval(spec.lo, spec.hi);
  }
  if (kind == "ball") {
    std::vector<double> center = spec.center;
    if (center.empty()) {
      center.assign(dim, 0.0);
    }
    return OgdDomain::ball(std::move(center), spec.radius);
  }
  throw std::runtime_error("config: unknown learner domain '" + spec.domain + "'");
}

std::unique_ptr<RoundLearner> make_runner(const LearnerSpec& spec, const ExperimentConfig& config) {
  const bool conformal = is_conformal_env(config.environment);
  const std::size_t dim = environment_dim(config.environment);
  const bool scalar_algo = spec.algo == "magl_d" || spec.algo == "magl" || spec.algo == "magdis";

  if (scalar_algo && dim != 1) {
    throw std::runtime_error("config: learner '" + spec.id + "' is 1D but the environment is " +
                             std::to_string(dim) + "-dimensional");
  }
  if (spec.algo == "vector" && conformal) {
    throw std::runtime_error("config: learner '" + spec.id +
                             "' (vector) cannot run on a radius stream");
  }

  if (spec.algo == "magl_d") {
    if (conformal) {
      return std::make_unique<ConformalRunner>(spec.eps, /*unit=*/false);
    }
    return std::make_unique<ScalarRunner>(MagnitudeState::make(MagnitudeVariant::kDiscounted, spec.eps),
                                          /*unit=*/false);
  }
  if (spec.algo == "magl") {
    if (conformal) {
      // Identical update path with the discount pinned at 1.
      return std::make_unique<ConformalRunner>(spec.eps, /*unit=*/true);
    }
    return std::make_unique<ScalarRunner>(
        MagnitudeState::make(MagnitudeVariant::kUndiscounted, spec.eps), /*unit=*/true);
  }
  if (spec.algo == "magdis") {
    return std::make_unique<ScalarRunner>(MagnitudeState::make_hint_free(spec.eps, spec.v0),
                                          /*unit=*/false);
  }
  if (spec.algo == "vector") {
    return std::make_unique<VectorRunner>(dim, spec.eps, spec.bias);
  }

  const OgdDomain domain = domain_from_spec(spec, conformal, dim);
  std::vector<double> x0(dim, 0.0);
  if (spec.algo == "ogd_constant") {
    double lambda = config.schedule.lambda(1);
    if (config.schedule.kind() != DiscountSchedule::Kind::kConstant) {
      throw std::runtime_error("config: ogd_constant requires a constant schedule");
    }
    return std::make_unique<OgdRunner>(
        OgdState::make(OgdRule::constant_lr(spec.diameter, spec.lipschitz, lambda), domain,
                       std::move(x0)),
        /*unit=*/false);
  }
  if (spec.algo == "ogd_horizon") {
    return std::make_unique<OgdRunner>(
        OgdState::make(OgdRule::horizon(spec.diameter, spec.lipschitz), domain, std::move(x0)),
        /*unit=*/false);
  }
  if (spec.algo == "ogd_adagrad") {
    return std::make_unique<OgdRunner>(
        OgdState::make(OgdRule::adagrad(spec.diameter), domain, std::move(x0)), /*unit=*/false);
  }
  if (spec.algo == "simple_ogd") {
    // Gradient-adaptive step with a bare learning-rate scale, played
    // undiscounted.
    return std::make_unique<OgdRunner>(
        OgdState::make(OgdRule::simple(spec.lr_scale), domain, std::move(x0)), /*unit=*/true);
  }
  throw std::runtime_error("config: unknown learner algo '" + spec.algo + "'");
}

StreamSpec trial_stream_spec(const ExperimentConfig& config, std::int64_t trial) {
  StreamSpec spec = config.environment;
  spec.seed = CounterRng::derive(config.seed, static_cast<std::uint64_t>(trial));
  if (auto* rad = std::get_if<RademacherSpec>(&spec.kind)) {
    if (!(rad->budget > 0.0)) {
      // Unset budget means the maximal admissible variance G^2 H_T.
      rad->budget = rad->lipschitz * rad->lipschitz *
                    effective_horizon(config.schedule, config.horizon);
    }
  }
  return spec;
}

RadiusLossEval radius_loss(const std::string& kind, double r, double r_star, double alpha) {
  if (kind == "skewed_quadratic") {
    return skewed_quadratic_loss(r, r_star, alpha);
  }
  return pinball_loss(r, r_star, alpha);
}

}  // namespace

RunLedger run_single_trial(const ExperimentConfig& config, const LearnerSpec& learner,
                           std::int64_t trial, double* step_ns) {
  auto runner = make_runner(learner, config);
  const StreamSpec stream = trial_stream_spec(config, trial);
  const std::int64_t horizon = config.horizon;

  RunLedger ledger;
  ledger.meta.algorithm = learner.algo;
  ledger.meta.spec_hash = config.spec_hash;
  ledger.meta.seed = stream.seed;
  ledger.meta.params["epsilon"] = learner.eps;
  ledger.meta.params["trial"] = static_cast<double>(trial);
  ledger.rounds.reserve(static_cast<std::size_t>(horizon));

  const auto started = std::chrono::steady_clock::now();

  if (std::holds_alternative<QuantileShiftSpec>(stream.kind)) {
    const QuantileStream radii = quantile_shift_stream(stream);
    ledger.meta.params["alpha"] = config.alpha;
    ledger.meta.params["radius_ceiling"] = radii.ceiling;
    for (std::int64_t t = 1; t <= horizon; ++t) {
      const double r = runner->predict()[0];
      const double r_star = radii.r_star[static_cast<std::size_t>(t - 1)];
      const RadiusLossEval eval = radius_loss(config.radius_loss, r, r_star, config.alpha);
      const double lambda = runner->unit_discount() ? 1.0 : config.schedule.lambda(t - 1);
      runner->update(std::span<const double>(&eval.gradient, 1), lambda);

      LedgerRound round;
      round.x = {r};
      round.g = {eval.gradient};
      round.lambda_prev = lambda;
      round.loss_value = eval.value;
      round.r_star = r_star;
      round.err = (r <= r_star) ? 1 : 0;
      LossSpec spec;
      spec.kind = config.radius_loss == "skewed_quadratic" ? LossSpec::Kind::kSkewedQuadratic
                                                           : LossSpec::Kind::kPinball;
      spec.r_star = r_star;
      spec.alpha = config.alpha;
      round.loss = std::move(spec);
      ledger.rounds.push_back(std::move(round));
    }
  } else if (std::holds_alternative<RademacherSpec>(stream.kind)) {
    const RademacherStream grads = rademacher_stream(stream, config.schedule);
    for (std::int64_t t = 1; t <= horizon; ++t) {
      std::vector<double> x = runner->predict();
      const std::vector<double>& g = grads.gradients[static_cast<std::size_t>(t - 1)];
      double loss_value = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        loss_value += g[i] * x[i];
      }
      const double lambda = runner->unit_discount() ? 1.0 : config.schedule.lambda(t - 1);
      runner->update(g, lambda);

      LedgerRound round;
      round.x = std::move(x);
      round.g = g;
      round.lambda_prev = lambda;
      round.loss_value = loss_value;
      round.loss = LossSpec{};  // linear
      ledger.rounds.push_back(std::move(round));
    }
  } else {
    const std::vector<DistanceLoss> losses = piecewise_linear_stream(stream);
    for (std::int64_t t = 1; t <= horizon; ++t) {
      std::vector<double> x = runner->predict();
      const DistanceLoss& loss = losses[static_cast<std::size_t>(t - 1)];
      std::vector<double> g = loss.gradient(x);
      const double loss_value = loss.value(x);
      const double lambda = runner->unit_discount() ? 1.0 : config.schedule.lambda(t - 1);
      runner->update(g, lambda);

      LedgerRound round;
      round.x = std::move(x);
      round.g = std::move(g);
      round.lambda_prev = lambda;
      round.loss_value = loss_value;
      LossSpec spec;
      spec.kind = LossSpec::Kind::kDistance;
      spec.optimum = loss.optimum;
      spec.scale = loss.scale;
      round.loss = std::move(spec);
      ledger.rounds.push_back(std::move(round));
    }
  }

  if (step_ns != nullptr) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    *step_ns = std::chrono::duration<double, std::nano>(elapsed).count() /
               static_cast<double>(horizon);
  }
  return ledger;
}

namespace {

// Realized discounted statistics a bound evaluation needs, reconstructed
// from the recorded gradients and discounts alone.
struct RealizedStats {
  std::vector<double> g_norm;       // per-round raw gradient norms
  std::vector<double> lipschitz;    // G_t sequence
  double variance = 0.0;            // V_T
  double horizon_mass = 0.0;        // H_T
  std::vector<double> x_norm;       // per-round prediction norms
};

RealizedStats realized_stats(const RunLedger& ledger) {
  RealizedStats stats;
  DiscountedMoments m;
  stats.g_norm.reserve(ledger.rounds.size());
  stats.lipschitz.reserve(ledger.rounds.size());
  stats.x_norm.reserve(ledger.rounds.size());
  for (const LedgerRound& round : ledger.rounds) {
    const double gn = vec_norm(round.g);
    m = update_moments(m, gn, round.lambda_prev);
    stats.g_norm.push_back(gn);
    stats.lipschitz.push_back(m.lipschitz);
    stats.x_norm.push_back(vec_norm(round.x));
  }
  stats.variance = m.variance;
  stats.horizon_mass = m.horizon;
  return stats;
}

double window_max(const std::vector<double>& values, std::int64_t first, std::int64_t last) {
  double best = 0.0;
  for (std::int64_t t = first; t <= last; ++t) {
    if (t >= 1 && static_cast<std::size_t>(t) <= values.size()) {
      best = std::max(best, values[static_cast<std::size_t>(t - 1)]);
    }
  }
  return best;
}

double forgetting_from_ledger(const RunLedger& ledger, std::int64_t first_round,
                              std::int64_t last_round) {
  double prod = 1.0;
  for (std::int64_t t = first_round; t <= last_round; ++t) {
    prod *= ledger.rounds[static_cast<std::size_t>(t - 1)].lambda_prev;
  }
  return prod;
}

void magnitude_bound_rows(const RunLedger& ledger, const LearnerSpec& learner,
                          const ExperimentConfig& config, std::int64_t trial,
                          std::vector<BoundVerdict>& out) {
  const auto horizon = static_cast<std::int64_t>(ledger.rounds.size());
  const RealizedStats stats = realized_stats(ledger);
  for (double u : config.comparators) {
    if (u < 0.0) {
      continue;  // the magnitude learner lives on [0, inf)
    }
    const std::vector<double> u_vec{u};
    const double measured = discounted_regret(ledger, u_vec, RegretMode::kLinearized);
    for (std::int64_t tau : config.tau_windows) {
      if (tau < 1 || tau > horizon) {
        continue;
      }
      MagnitudeBoundArgs args;
      args.variance = stats.variance;
      args.lipschitz = stats.lipschitz.back();
      args.comparator = u;
      args.eps = learner.eps;
      args.tau = tau;
      // prod of the discounts revealed in rounds T-tau+1 .. T
      args.forgetting = forgetting_from_ledger(ledger, horizon - tau + 1, horizon);
      args.max_x_recent = window_max(stats.x_norm, horizon - tau + 1, horizon);
      args.max_x_old = window_max(stats.x_norm, 1, horizon - tau);
      args.lipschitz_old =
          (horizon - tau >= 1) ? stats.lipschitz[static_cast<std::size_t>(horizon - tau - 1)] : 0.0;
      const double bound = magnitude_regret_bound(args);
      out.push_back({learner.id, trial, "magnitude_adaptive", u, tau, measured, bound,
                     measured <= bound});
    }
  }
}

void ogd_bound_rows(const RunLedger& ledger, const LearnerSpec& learner,
                    const ExperimentConfig& config, std::int64_t trial,
                    std::vector<BoundVerdict>& out) {
  const RealizedStats stats = realized_stats(ledger);
  const double realized_g = *std::max_element(stats.g_norm.begin(), stats.g_norm.end());
  const std::size_t dim = ledger.rounds.front().x.size();
  const bool conformal = ledger.rounds.front().r_star.has_value();
  const OgdDomain domain = domain_from_spec(learner, conformal, dim);

  // The envelopes assume comparators inside the feasible region and a
  // diameter the rule was tuned for; rows outside the premises are skipped.
  const bool diameter_ok = domain.diameter() <= learner.diameter * (1.0 + 1e-12);

  for (double u : config.comparators) {
    std::vector<double> u_vec(dim, 0.0);
    u_vec[0] = u;
    if (domain.project(u_vec) != u_vec) {
      continue;
    }
    const double measured = discounted_regret(ledger, u_vec, RegretMode::kLinearized);
    if (learner.algo == "ogd_horizon") {
      if (!diameter_ok || realized_g > learner.lipschitz * (1.0 + 1e-12)) {
        continue;
      }
      const double bound =
          horizon_ogd_regret_bound(learner.diameter, learner.lipschitz, stats.horizon_mass);
      out.push_back({learner.id, trial, "horizon_ogd", u, std::nullopt, measured, bound,
                     measured <= bound});
    } else if (learner.algo == "ogd_adagrad") {
      if (!diameter_ok) {
        continue;
      }
      const double bound = adagrad_regret_bound(learner.diameter, stats.variance);
      out.push_back({learner.id, trial, "adagrad", u, std::nullopt, measured, bound,
                     measured <= bound});
    } else if (learner.algo == "ogd_constant") {
      const double lambda = config.schedule.lambda(1);
      const bool long_enough =
          static_cast<double>(ledger.rounds.size()) >= 0.5 / (1.0 - lambda);
      if (!diameter_ok || !long_enough || realized_g > learner.lipschitz * (1.0 + 1e-12)) {
        continue;
      }
      const double bound = constant_lr_regret_bound(learner.diameter, learner.lipschitz, lambda);
      out.push_back({learner.id, trial, "constant_ogd", u, std::nullopt, measured, bound,
                     measured <= bound});
    }
  }
}

void coverage_bound_row(const RunLedger& ledger, const LearnerSpec& learner, std::int64_t trial,
                        std::vector<BoundVerdict>& out) {
  // Clipped statistics and the raw coverage metric, reconstructed from the
  // recorded subgradients and discounts.
  double s_raw = 0.0;
  double s_clip = 0.0;
  double v_clip = 0.0;
  double g_max = 0.0;
  double ceiling = 0.0;
  for (const LedgerRound& round : ledger.rounds) {
    const double g = round.g.at(0);
    const double lambda = round.lambda_prev;
    const double clip = std::clamp(g, -lambda * g_max, lambda * g_max);
    s_raw = lambda * s_raw - g;
    s_clip = lambda * s_clip - clip;
    v_clip = lambda * lambda * v_clip + clip * clip;
    g_max = std::max(lambda * g_max, std::abs(g));
    ceiling = std::max(ceiling, round.r_star.value_or(0.0));
  }
  const double bound = coverage_deviation_bound(v_clip, g_max, ceiling, learner.eps);
  out.push_back({learner.id, trial, "coverage_deviation", std::nullopt, std::nullopt,
                 std::abs(s_raw), bound, std::abs(s_raw) <= bound});
}

void vector_bound_rows(const RunLedger& ledger, const LearnerSpec& learner,
                       const ExperimentConfig& config, std::int64_t trial,
                       std::vector<BoundVerdict>& out) {
  const auto horizon = static_cast<std::int64_t>(ledger.rounds.size());
  if (horizon == 0 || ledger.rounds.front().x.empty()) {
    return;
  }
  const std::size_t dim = ledger.rounds.front().x.size();
  RealizedStats stats = realized_stats(ledger);
  // The envelope lives in the shifted frame: iterate magnitudes and the
  // comparator distance are measured from the inductive bias.
  std::vector<double> bias = learner.bias;
  if (bias.empty()) {
    bias.assign(dim, 0.0);
  }
  for (std::size_t t = 0; t < ledger.rounds.size(); ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = ledger.rounds[t].x[i] - bias[i];
      acc += d * d;
    }
    stats.x_norm[t] = std::sqrt(acc);
  }

  // Replay the learner to recover the gradients its two sub-learners were
  // fed; the composite envelope is stated over those.
  VectorLearnerState state = VectorLearnerState::make(dim, learner.eps, learner.bias);
  DiscountedMoments fed_scalar;   // stats of <g_clip, w_t>
  DiscountedMoments fed_ball;     // stats of g_clip
  for (const LedgerRound& round : ledger.rounds) {
    const double lambda = round.lambda_prev;
    const double decayed = lambda * state.h;
    const double g_norm = vec_norm(round.g);
    const double new_hint = std::max(decayed, g_norm);
    double scalar_g = 0.0;
    double clip_norm = 0.0;
    if (new_hint > 0.0) {
      const double scale = decayed / new_hint;
      for (std::size_t i = 0; i < dim; ++i) {
        scalar_g += round.g[i] * scale * state.ball.w[i];
      }
      clip_norm = g_norm * scale;
    }
    fed_scalar = update_moments(fed_scalar, std::abs(scalar_g), lambda);
    fed_ball = update_moments(fed_ball, clip_norm, lambda);
    state = vector_update(state, round.g, lambda);
  }

  for (double u : config.comparators) {
    std::vector<double> u_vec(dim, 0.0);
    u_vec[0] = u;
    double u_dist2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = u_vec[i] - bias[i];
      u_dist2 += d * d;
    }
    const double u_norm = std::sqrt(u_dist2);
    const double measured = discounted_regret(ledger, u_vec, RegretMode::kLinearized);

    for (std::int64_t tau : config.tau_windows) {
      if (tau < 1 || tau > horizon) {
        continue;
      }
      MagnitudeBoundArgs args;
      args.variance = fed_scalar.variance;
      args.lipschitz = fed_scalar.lipschitz;
      args.comparator = u_norm;
      args.eps = learner.eps;
      args.tau = tau;
      args.forgetting = forgetting_from_ledger(ledger, horizon - tau + 1, horizon);
      args.max_x_recent = window_max(stats.x_norm, horizon - tau + 1, horizon);
      args.max_x_old = window_max(stats.x_norm, 1, horizon - tau);
      args.lipschitz_old =
          (horizon - tau >= 1) ? stats.lipschitz[static_cast<std::size_t>(horizon - tau - 1)] : 0.0;
      // Magnitude terms use the fed-gradient moments; the clipping-error
      // terms range over the raw gradients, so swap in the raw Lipschitz
      // constant for those.
      const double mag_core = magnitude_regret_bound(MagnitudeBoundArgs{
          args.variance, args.lipschitz, args.comparator, args.eps, args.tau, 0.0, 0.0, 0.0, 0.0});
      const double raw_g = stats.lipschitz.back();
      const double clip_terms = u_norm * (raw_g - args.lipschitz) + args.max_x_recent * raw_g +
                                args.forgetting * args.max_x_old * args.lipschitz_old;
      const double ball_term = 3.0 * u_norm * std::sqrt(fed_ball.variance);
      const double bound = mag_core + ball_term + std::max(clip_terms, 0.0);
      out.push_back({learner.id, trial, "vector_adaptive", u, tau, measured, bound,
                     measured <= bound});
    }
  }
}

}  // namespace

std::vector<BoundVerdict> verify_bounds(const RunLedger& ledger, const LearnerSpec& learner,
                                        const ExperimentConfig& config, std::int64_t trial) {
  std::vector<BoundVerdict> out;
  if (ledger.rounds.empty()) {
    return out;
  }
  const bool conformal = ledger.rounds.front().r_star.has_value();

  if (learner.algo == "magl_d" || learner.algo == "magl") {
    magnitude_bound_rows(ledger, learner, config, trial, out);
    if (conformal) {
      coverage_bound_row(ledger, learner, trial, out);
    }
  } else if (learner.algo == "vector") {
    vector_bound_rows(ledger, learner, config, trial, out);
  } else if (learner.algo.rfind("ogd_", 0) == 0) {
    ogd_bound_rows(ledger, learner, config, trial, out);
  }
  // magdis and simple_ogd carry no guarantee; no rows.
  return out;
}

ReplayResult replay_ledger(const RunLedger& ledger, const LearnerSpec& learner,
                           const ExperimentConfig& config) {
  auto runner = make_runner(learner, config);
  ReplayResult result;
  std::int64_t t = 0;
  for (const LedgerRound& round : ledger.rounds) {
    ++t;
    const std::vector<double> x = runner->predict();
    double diff = 0.0;
    for (std::size_t i = 0; i < x.size() && i < round.x.size(); ++i) {
      diff = std::max(diff, std::abs(x[i] - round.x[i]));
    }
    if (x.size() != round.x.size() || diff != 0.0) {
      result.max_abs_diff = std::max(result.max_abs_diff, diff);
      if (result.ok) {
        result.ok = false;
        result.first_mismatch = t;
      }
    }
    runner->update(round.g, round.lambda_prev);
  }
  return result;
}

unsigned worker_count(std::size_t task_count) {
  unsigned workers = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("DISCOUNTED_OCO_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) {
      workers = static_cast<unsigned>(parsed);
    }
  }
  if (workers == 0) {
    workers = 1;
  }
  return static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(task_count, 1)));
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  struct Task {
    std::size_t learner_index;
    std::int64_t trial;
  };
  std::vector<Task> tasks;
  for (std::size_t li = 0; li < config.learners.size(); ++li) {
    for (std::int64_t trial = 0; trial < config.trials; ++trial) {
      tasks.push_back({li, trial});
    }
  }

  struct Outcome {
    RunLedger ledger;
    double step_ns = 0.0;
    std::vector<BoundVerdict> verdicts;
    std::optional<CoverageReport> coverage;
  };
  std::vector<Outcome> outcomes(tasks.size());

  const bool conformal = is_conformal_env(config.environment);
  auto run_task = [&](std::size_t index) {
    const Task& task = tasks[index];
    const LearnerSpec& learner = config.learners[task.learner_index];
    Outcome& outcome = outcomes[index];
    outcome.ledger = run_single_trial(config, learner, task.trial, &outcome.step_ns);
    outcome.verdicts = verify_bounds(outcome.ledger, learner, config, task.trial);
    if (conformal) {
      const std::int64_t k = std::min<std::int64_t>(config.coverage_window, config.horizon);
      outcome.coverage = coverage_metrics(outcome.ledger, k, config.alpha);
    }
  };

  const unsigned workers = worker_count(tasks.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      run_task(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t index = next.fetch_add(1);
          if (index >= tasks.size()) {
            return;
          }
          run_task(index);
        }
      });
    }
    for (std::thread& thread : pool) {
      thread.join();
    }
  }

  ExperimentReport report;
  const std::filesystem::path out_dir = config.out_dir / config.name;
  if (options.write_outputs) {
    std::filesystem::create_directories(out_dir);
  }

  std::ofstream bounds_csv;
  if (options.write_outputs) {
    bounds_csv.open(out_dir / "bounds.csv");
    bounds_csv << "version,learner,trial,check,u,tau,measured,bound,pass\n";
  }

  for (std::size_t li = 0; li < config.learners.size(); ++li) {
    const LearnerSpec& learner = config.learners[li];
    LearnerSummary summary;
    summary.id = learner.id;
    summary.algo = learner.algo;
    summary.trials = config.trials;

    std::vector<double> step_ns;
    std::vector<double> cov, width, lce;
    for (std::size_t index = 0; index < tasks.size(); ++index) {
      if (tasks[index].learner_index != li) {
        continue;
      }
      const Outcome& outcome = outcomes[index];
      step_ns.push_back(outcome.step_ns);
      if (outcome.coverage) {
        cov.push_back(outcome.coverage->avg_coverage);
        width.push_back(outcome.coverage->avg_width);
        lce.push_back(outcome.coverage->lce);
      }
      if (options.write_outputs) {
        const std::string stem = learner.id + "-trial" + std::to_string(tasks[index].trial);
        write_jsonl(outcome.ledger, out_dir / (stem + ".jsonl"));
        if (outcome.coverage) {
          // Plot-ready local series over forward windows [t, t+k-1].
          std::ofstream series(out_dir / (stem + "-series.csv"));
          series << "version,t,local_coverage,local_width,best_local_width\n";
          const CoverageReport& cov = *outcome.coverage;
          for (std::size_t t = 0; t < cov.local_coverage.size(); ++t) {
            series << "1," << (t + 1) << ',' << format_double(cov.local_coverage[t]) << ','
                   << format_double(cov.local_width[t]) << ','
                   << format_double(cov.best_local_width[t]) << '\n';
          }
        }
      }
      for (const BoundVerdict& verdict : outcome.verdicts) {
        ++summary.bounds_checked;
        if (!verdict.pass) {
          ++summary.bounds_failed;
          report.all_bounds_pass = false;
        }
        if (options.write_outputs) {
          bounds_csv << "1," << verdict.learner << ',' << verdict.trial << ',' << verdict.check
                     << ',' << csv_optional(verdict.u) << ','
                     << (verdict.tau ? std::to_string(*verdict.tau) : std::string()) << ','
                     << format_double(verdict.measured) << ',' << format_double(verdict.bound)
                     << ',' << (verdict.pass ? "1" : "0") << '\n';
        }
        report.verdicts.push_back(verdict);
      }
    }

    auto mean_of = [](const std::vector<double>& v) {
      double acc = 0.0;
      for (double x : v) acc += x;
      return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
    };
    auto std_of = [&](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      const double mu = mean_of(v);
      double acc = 0.0;
      for (double x : v) acc += (x - mu) * (x - mu);
      return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };

    summary.step_ns_mean = mean_of(step_ns);
    summary.step_ns_std = std_of(step_ns);
    if (!cov.empty()) {
      summary.coverage_mean = mean_of(cov);
      summary.coverage_std = std_of(cov);
      summary.width_mean = mean_of(width);
      summary.width_std = std_of(width);
      summary.lce_mean = mean_of(lce);
      summary.lce_max = *std::max_element(lce.begin(), lce.end());
    }
    report.learners.push_back(std::move(summary));
  }

  if (options.write_outputs) {
    std::ofstream summary_csv(out_dir / "summary.csv");
    summary_csv << "version,learner,algo,trials,horizon,step_ns_mean,step_ns_std,"
                   "avg_coverage_mean,avg_coverage_std,avg_width_mean,avg_width_std,"
                   "lce_mean,lce_max,bounds_checked,bounds_failed\n";
    for (const LearnerSummary& s : report.learners) {
      summary_csv << "1," << s.id << ',' << s.algo << ',' << s.trials << ',' << config.horizon
                  << ',' << format_double(s.step_ns_mean) << ',' << format_double(s.step_ns_std)
                  << ',' << csv_optional(s.coverage_mean) << ',' << csv_optional(s.coverage_std)
                  << ',' << csv_optional(s.width_mean) << ',' << csv_optional(s.width_std) << ','
                  << csv_optional(s.lce_mean) << ',' << csv_optional(s.lce_max) << ','
                  << s.bounds_checked << ',' << s.bounds_failed << '\n';
    }
  }

  if (!options.quiet) {
    for (const LearnerSummary& s : report.learners) {
      std::printf("%-16s %-12s trials=%-3lld step=%.0f±%.0f ns", s.id.c_str(), s.algo.c_str(),
                  static_cast<long long>(s.trials), s.step_ns_mean, s.step_ns_std);
      if (s.coverage_mean) {
        std::printf("  coverage=%.4f±%.4f width=%.4f lce=%.4f", *s.coverage_mean,
                    *s.coverage_std, *s.width_mean, s.lce_max.value_or(0.0));
      }
      std::printf("  bounds %lld/%lld ok\n",
                  static_cast<long long>(s.bounds_checked - s.bounds_failed),
                  static_cast<long long>(s.bounds_checked));
    }
  }
  return report;
}

}  // namespace doco
