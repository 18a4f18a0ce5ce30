#pragma once

#include <cmath>
#include <cstdint>

namespace safesim {

/// Counter-based random draws: every value is a pure function of
/// (seed, a, b, c), so adding robots or runs never perturbs earlier streams.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

/// Uniform double in (0, 1].
inline double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
  const std::uint64_t bits = mix(seed, a, b, c);
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_in(std::uint64_t seed, double lo, double hi,
                         std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0) {
  const std::uint64_t bits = mix(seed, a, b, c);
  return lo + (hi - lo) * static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two derived uniforms.
inline double normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                     std::uint64_t c = 0) {
  const double u1 = uniform(seed, a, b, 2 * c);
  const double u2 = uniform(seed, a, b, 2 * c + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Per-run seed derived from a master seed by a fixed counter scheme.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  return mix(master, 0x52554e5345454453ULL, counter);
}

}  // namespace rng
}  // namespace safesim
