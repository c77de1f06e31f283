#include "doco/rng.hpp"

#include <cmath>
#include <numbers>

namespace doco {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream + kGolden))) {}

std::uint64_t CounterRng::next_u64() {
  return mix64(key_ + (++counter_) * kGolden);
}

double CounterRng::next_uniform() {
  // 53 random bits, centered to keep the value strictly inside (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal(double mean, double stddev) {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return mean + stddev * cached_normal_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return mean + stddev * radius * std::cos(angle);
}

double CounterRng::next_sign() {
  return (next_u64() & 1ull) ? 1.0 : -1.0;
}

std::uint64_t CounterRng::derive(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix64(base + kGolden * (a + 1) + mix64(b + kGolden));
}

}  // namespace doco
