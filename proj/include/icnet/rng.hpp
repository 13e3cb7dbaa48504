#pragma once

#include <cmath>
#include <cstdint>

namespace icnet {

/// Counter-based random numbers: every draw is a pure function of
/// (key, index), so parallel generation is order-independent and two
/// runs with the same seed are bit-identical.
namespace rng {

inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t stream) {
  return mix(mix(seed) ^ (0x6a09e667f3bcc909ULL + stream));
}

/// Uniform in (0, 1); never returns exactly 0 or 1.
inline double uniform(std::uint64_t k, std::uint64_t index) {
  const std::uint64_t bits = mix(k ^ mix(index + 1));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on counters (2*index, 2*index + 1).
inline double normal(std::uint64_t k, std::uint64_t index) {
  const double u1 = uniform(k, 2 * index);
  const double u2 = uniform(k, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

}  // namespace rng
}  // namespace icnet
