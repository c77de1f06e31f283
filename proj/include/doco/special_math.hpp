#pragma once

#include <cstdint>

namespace doco {

/// exp(x) with the argument clamped to +-max_arg before exponentiation.
/// Clamping is reported through `saturated` instead of producing inf/0.
struct ClampedExp {
  double value = 1.0;
  bool saturated = false;
};

inline constexpr double kMaxExpArg = 700.0;

ClampedExp stable_exp(double x, double max_arg = kMaxExpArg);

/// Scaled imaginary error function: integral of exp(u^2) over [0, x].
/// (sqrt(pi)/2 times the conventional erfi.) Odd and strictly increasing.
/// Throws std::domain_error on non-finite input. Values above ~26.6 overflow
/// to inf, matching the true integral exceeding double range.
double erfi(double x);

/// Largest |x| for which erfi(x) stays inside double range; callers that must
/// not overflow clamp their argument here and flag saturation.
inline constexpr double kMaxErfiArg = 26.457513110645905;  // sqrt(700)

/// Sufficient statistics the FTRL potential is evaluated at.
struct PotentialArgs {
  double v = 0.0;    // discounted gradient variance, >= 0
  double s = 0.0;    // discounted negated gradient sum
  double h = 0.0;    // discounted Lipschitz hint, >= 0
  double eps = 1.0;  // confidence hyperparameter, > 0
};

/// FTRL potential eps * sqrt(v + 2hs + 16h^2) * (2*I(z) - 1) where
/// z = s / (2*sqrt(v + 2hs + 16h^2)) and I(z) is the integral of erfi over
/// [0, z], evaluated in closed form as z*erfi(z) - (exp(z^2) - 1)/2.
/// Requires h > 0 and a positive radicand; throws std::domain_error otherwise.
/// Used by diagnostics and tests, not by the prediction path.
double potential(const PotentialArgs& args);

}  // namespace doco
