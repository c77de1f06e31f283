#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "doco/schedule.hpp"

namespace doco {

/// Feasible region for projected gradient descent. Interval domains are 1D;
/// ball domains project radially around their center.
struct OgdDomain {
  enum class Kind { kUnconstrained, kInterval, kBall };
  Kind kind = Kind::kUnconstrained;
  double lo = 0.0, hi = 0.0;          // interval bounds
  std::vector<double> center;         // ball center
  double radius = 0.0;                // ball radius

  static OgdDomain unconstrained();
  static OgdDomain interval(double lo, double hi);
  static OgdDomain ball(std::vector<double> center, double radius);

  std::vector<double> project(std::vector<double> x) const;
  double diameter() const;  // inf for unconstrained
};

/// Learning-rate rule of the OGD family.
///  - kConstant: eta = (D/G) sqrt(1 - lambda^2); valid only under a constant
///    schedule with known diameter D and Lipschitz bound G.
///  - kHorizon: eta_t = (D/G) / sqrt(H_t), horizon-adaptive.
///  - kAdaGrad: eta_t = D / sqrt(V_t), gradient-adaptive.
///  - kSimple:  the AdaGrad rule with D replaced by a bare learning-rate
///    scale (default 1), intended to run undiscounted.
struct OgdRule {
  enum class Kind { kConstant, kHorizon, kAdaGrad, kSimple };
  Kind kind = Kind::kAdaGrad;
  double diameter = 1.0;   // D (or the learning-rate scale for kSimple)
  double lipschitz = 1.0;  // G (kConstant / kHorizon)
  double lambda = 1.0;     // the constant discount kConstant was tuned for

  static OgdRule constant_lr(double diameter, double lipschitz, double lambda);
  static OgdRule horizon(double diameter, double lipschitz);
  static OgdRule adagrad(double diameter);
  static OgdRule simple(double lr_scale = 1.0);
};

struct OgdState {
  std::vector<double> x;
  OgdDomain domain;
  OgdRule rule;
  DiscountedMoments moments;  // H_t, V_t, G_t of the observed gradients

  static OgdState make(OgdRule rule, OgdDomain domain, std::vector<double> x0);
};

/// One projected step x' = Proj(x - eta_t g) after folding g into the
/// discounted moments. Gradient-adaptive rules hold position while V_t = 0.
/// A kConstant rule rejects any lambda other than the one it was tuned for.
OgdState ogd_step(const OgdState& state, std::span<const double> g, double lambda_prev);

/// Unconstrained OGD on the L2-regularized surrogate <g,x> + (gamma/2)||x||^2:
/// returns (1 - eta*gamma) x - eta g.
std::vector<double> l2_regularized_ogd_step(std::span<const double> x,
                                            std::span<const double> g, double eta,
                                            double gamma);

/// Linear-prediction FTRL over a discounted gradient sum: sum' = lambda*sum + g,
/// prediction -c * sum'. Under eta = c, gamma = (1 - lambda)/eta this walks the
/// same iterates as l2_regularized_ogd_step.
struct LinearFtrlResult {
  std::vector<double> sum;
  std::vector<double> prediction;
};
LinearFtrlResult linear_ftrl_step(std::span<const double> sum, std::span<const double> g,
                                  double lambda, double c);

/// Worst-case regret envelopes of the OGD family, checked by the harness.
double constant_lr_regret_bound(double diameter, double lipschitz, double lambda);
double horizon_ogd_regret_bound(double diameter, double lipschitz, double horizon);
double adagrad_regret_bound(double diameter, double variance);

}  // namespace doco
