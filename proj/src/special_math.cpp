#include "doco/special_math.hpp"

#include <cmath>
#include <stdexcept>

namespace doco {

ClampedExp stable_exp(double x, double max_arg) {
  if (std::isnan(x)) {
    throw std::domain_error("stable_exp: NaN argument");
  }
  ClampedExp out;
  double clamped = x;
  if (clamped > max_arg) {
    clamped = max_arg;
    out.saturated = true;
  } else if (clamped < -max_arg) {
    clamped = -max_arg;
    out.saturated = true;
  }
  out.value = std::exp(clamped);
  return out;
}

namespace {

// Maclaurin series sum_n x^(2n+1) / (n! (2n+1)). All terms share the sign of
// x, so there is no cancellation; usable until exp(x^2) overflows.
double erfi_series(double x) {
  const double x2 = x * x;
  double term = x;  // n = 0
  double sum = x;
  for (int n = 1; n < 4096; ++n) {
    term *= x2 / static_cast<double>(n);
    const double contrib = term / static_cast<double>(2 * n + 1);
    sum += contrib;
    if (std::abs(contrib) <= 1e-17 * std::abs(sum)) {
      break;
    }
  }
  return sum;
}

// Asymptotic expansion exp(x^2)/(2x) * sum_k (2k-1)!! / (2x^2)^k, truncated
// at the smallest term. Below |x| ~ 6 the smallest term is too coarse, which
// is why the series switch lives at 6 rather than lower.
double erfi_asymptotic(double x) {
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    const double next = term * static_cast<double>(2 * k - 1) * inv;
    if (next >= term) {
      break;  // divergent tail reached
    }
    term = next;
    sum += term;
    if (term <= 1e-17 * sum) {
      break;
    }
  }
  return std::exp(x * x) / (2.0 * x) * sum;
}

constexpr double kSeriesCutoff = 6.0;

}  // namespace

double erfi(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("erfi: non-finite argument");
  }
  const double ax = std::abs(x);
  if (ax <= kSeriesCutoff) {
    return erfi_series(x);
  }
  const double value = erfi_asymptotic(ax);
  return std::copysign(value, x);
}

double potential(const PotentialArgs& args) {
  if (!(args.eps > 0.0) || args.v < 0.0 || args.h <= 0.0) {
    throw std::domain_error("potential: requires eps > 0, v >= 0, h > 0");
  }
  const double radicand = args.v + 2.0 * args.h * args.s + 16.0 * args.h * args.h;
  if (!(radicand > 0.0)) {
    throw std::domain_error("potential: nonpositive radicand");
  }
  const double root = std::sqrt(radicand);
  const double z = args.s / (2.0 * root);
  // integral of erfi over [0, z] by parts
  const double inner = z * erfi(z) - (std::exp(z * z) - 1.0) / 2.0;
  return args.eps * root * (2.0 * inner - 1.0);
}

}  // namespace doco
