#pragma once

#include "graphstab/errors.hpp"

namespace gs {

// Base dimension n of the graph domain R^n (the hypersurface lives in
// R^(n+1)). Product quadrature on S^(n-1) scales exponentially with n, so
// the library caps n at 7; constructing a Dimension outside [3,7] throws.
inline constexpr int kMinDim = 3;
inline constexpr int kMaxDim = 7;

class Dimension {
 public:
  explicit Dimension(int n) : n_(n) {
    if (n < kMinDim || n > kMaxDim)
      throw PreconditionError("dimension must be in [3,7], got " +
                              std::to_string(n));
  }
  int n() const { return n_; }

 private:
  int n_;
};

// Dimension-dependent constants used throughout:
//   omega = area of the unit sphere S^(n-1) in R^n,
//   c_n   = 2 (n-1) omega, the mass normalization,
//   beta  = omega / n, the volume of the unit n-ball.
struct Constants {
  double omega;
  double c_n;
  double beta;

  static Constants at(Dimension d);
};

double unit_sphere_area(int n);  // |S^(n-1)|

}  // namespace gs
