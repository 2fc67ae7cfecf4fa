#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "quadsig/geometry.hpp"

namespace quadsig {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of stream `index` under `base`. Distinct (base, index) pairs give
// statistically independent generators.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline void fill_gaussian(std::span<double> out, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v = normal(rng);
}

// Uniform point on the unit sphere S^{n-1}.
inline void sample_unit_sphere(std::span<double> out, Rng& rng) {
  double r = 0.0;
  do {
    fill_gaussian(out, rng);
    r = norm(out);
  } while (!(r > 0.0));
  for (double& v : out) v /= r;
}

inline Vector sample_unit_sphere(int n, Rng& rng) {
  Vector v(static_cast<std::size_t>(n));
  sample_unit_sphere(std::span<double>(v), rng);
  return v;
}

}  // namespace quadsig
