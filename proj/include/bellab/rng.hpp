#pragma once

#include <cstdint>
#include <random>

namespace bellab {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for sub-stream `index` of a run seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Seeded random stream. Output depends only on (seed, stream), never on
/// the standard library's distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(derive_seed(seed, stream)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bellab
