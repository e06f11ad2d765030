#pragma once

#include <cstdint>

namespace sap {

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based SplitMix64 stream: the i-th draw is a pure function of
/// (seed, stream, i), so sequences are identical on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sap
