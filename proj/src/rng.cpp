#include "ordenc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ordenc::rng {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Engine::uniform01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Engine::normal() {
  // u1 in (0, 1] so the log is finite
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return radius * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Engine::uniform_index(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("uniform_index: n must be positive");
  }
  // rejection sampling over the largest multiple of n below 2^64
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % static_cast<std::uint64_t>(n);
  std::uint64_t draw = gen_();
  while (draw >= limit) {
    draw = gen_();
  }
  return static_cast<std::size_t>(draw % static_cast<std::uint64_t>(n));
}

}  // namespace ordenc::rng
