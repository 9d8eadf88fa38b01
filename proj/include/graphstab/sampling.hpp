#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "graphstab/smallvec.hpp"

namespace gs {

// Low-discrepancy deterministic sampling. Used wherever "sampled points"
// appear in verification: the sequences depend only on the index, so every
// run and thread count sees the same points.

inline double halton(uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  uint64_t k = i + 1;  // skip the origin
  while (k > 0) {
    f /= base;
    r += f * static_cast<double>(k % static_cast<uint64_t>(base));
    k /= static_cast<uint64_t>(base);
  }
  return r;
}

inline constexpr int kHaltonPrimes[8] = {2, 3, 5, 7, 11, 13, 17, 19};

// Unit direction via Box-Muller over Halton pairs.
inline VecN halton_direction(int n, uint64_t i) {
  VecN d(n);
  for (int k = 0; k < n; k += 2) {
    double u1 = halton(i, kHaltonPrimes[k]);
    double u2 = halton(i, kHaltonPrimes[k + 1]);
    u1 = std::max(u1, 1e-12);
    double r = std::sqrt(-2.0 * std::log(u1));
    d[k] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (k + 1 < n) d[k + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  double len = norm(d);
  if (len < 1e-12) {
    d = VecN(n);
    d[0] = 1.0;
    return d;
  }
  return (1.0 / len) * d;
}

// Point in the annulus r_lo <= |x| <= r_hi (log-spaced radii when the ratio
// is large, linear otherwise).
inline VecN halton_annulus_point(int n, uint64_t i, double r_lo, double r_hi) {
  double t = halton(i, kHaltonPrimes[7]);
  double r;
  if (r_lo > 0.0 && r_hi / r_lo > 16.0)
    r = r_lo * std::pow(r_hi / r_lo, t);
  else
    r = r_lo + t * (r_hi - r_lo);
  return r * halton_direction(n, i);
}

}  // namespace gs
