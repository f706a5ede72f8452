#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace ordenc::rng {

/// Derives an independent stream seed from a base seed and a stream tag
/// (splitmix64 finalizer). Used to decouple e.g. weight init, batch
/// sampling, and subset selection inside one run.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

/// Deterministic random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the value transforms (uniform, normal,
/// index) are implemented here rather than taken from <random> distributions
/// so that sampled sequences are identical across standard libraries.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01();

  /// Standard normal via Box-Muller (two uniforms per call, no cached spare).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ordenc::rng
