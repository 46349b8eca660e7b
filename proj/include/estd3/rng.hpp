#pragma once

#include <cstdint>
#include <random>

namespace estd3 {

/// Mixes a master seed with a stream tag so that independent consumers
/// (network init, exploration noise, batch sampling, ...) never share a
/// generator. Two applications of splitmix64 over the combined value.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Deterministic random source. All draws are implemented explicitly on top
/// of mt19937_64 so a (seed, platform) pair fully determines every sample,
/// independent of the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1): top 53 bits of next_u64.
  double uniform01();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n), n >= 1. Modulo reduction; the tiny bias is
  /// irrelevant here and the mapping is fixed.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via Box-Muller. Two uniforms per draw, no cached spare.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace estd3
