#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace proxkit {

/// SplitMix64 step; advances `state` and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// std::mt19937_64 with hand-derived variates; a seed reproduces the same
/// data on every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent substream for (seed, name): the engine is seeded with
  /// splitmix64(seed ^ fnv1a64(name)).
  static Rng substream(std::uint64_t seed, std::string_view name);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Index drawn with probability proportional to weights[i].
  std::size_t discrete(std::span<const double> weights);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace proxkit
