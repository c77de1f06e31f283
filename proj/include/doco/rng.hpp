#pragma once

#include <cstdint>

namespace doco {

/// Counter-based pseudo-random generator "sm64c-1": the SplitMix64 finalizer
/// applied to key + (counter+1) * golden. Output depends only on
/// (seed, stream, counter), so streams are reproducible and independent
/// trials can be keyed without sharing state. The mapping is fixed; changing
/// it invalidates recorded streams, so treat it as a file-format version.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on (0, 1), never exactly 0 or 1.
  double next_uniform();
  /// Box-Muller normal; consumes two uniforms per pair, caches the spare.
  double next_normal(double mean = 0.0, double stddev = 1.0);
  /// Fair +-1.
  double next_sign();

  /// Stable mixing of (base, a, b) into a sub-seed, used to key trials.
  static std::uint64_t derive(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace doco
