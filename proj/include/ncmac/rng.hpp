#pragma once

#include <cstdint>
#include <random>

#include "ncmac/types.hpp"

namespace ncmac {

using Rng = std::mt19937_64;

// SplitMix64 step; used to whiten seeds and derive substream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic generator for the substream (seed, a, b).  Every simulated
// block and every optimizer restart gets its own stream so results do not
// depend on evaluation order.
inline Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = seed;
  std::uint64_t key = splitmix64(s);
  s ^= a * 0x9e3779b97f4a7c15ull;
  key ^= splitmix64(s);
  s ^= b * 0xc2b2ae3d27d4eb4full;
  key ^= splitmix64(s);
  return Rng(key);
}

// One draw from the standard circularly-symmetric complex Gaussian CN(0,1):
// real and imaginary parts are independent N(0, 1/2).  The distribution is
// local so no state leaks between substreams.
inline Complex complex_gaussian(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double re = gauss(rng);
  const double im = gauss(rng);
  return Complex(re, im) * (1.0 / std::sqrt(2.0));
}

// r x c matrix with iid CN(0,1) entries, filled row-major so the draw order
// is part of the reproducibility contract.
inline CMatrix random_cgaussian(int rows, int cols, Rng& rng) {
  CMatrix out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = complex_gaussian(rng);
  return out;
}

}  // namespace ncmac
