#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ecdfb {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for replicate `index` of a run seeded with `seed`.
/// Results of replicate loops therefore do not depend on thread count or order.
inline std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

/// Uniform on (0,1) with 53 random bits; never returns 0.
inline double uniform01(std::mt19937_64& gen) noexcept {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw by the Box-Muller transform (one of the pair is used).
inline double standard_normal(std::mt19937_64& gen) noexcept {
  const double radius = std::sqrt(-2.0 * std::log(uniform01(gen)));
  return radius * std::cos(6.283185307179586 * uniform01(gen));
}

}  // namespace ecdfb
