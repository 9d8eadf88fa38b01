#pragma once

#include <algorithm>
#include <cmath>

#include "graphstab/smallvec.hpp"

namespace gs {

// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
// Sizes are at most kMaxDim, where a handful of sweeps reaches machine
// precision; used for the projected-Hessian convexity checks.
inline VecN symmetric_eigenvalues(MatN a) {
  const int n = a.n;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off <= 1e-30 * (1.0 + frobenius2(a))) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (apq == 0.0) continue;
        double theta = 0.5 * (a.at(q, q) - a.at(p, p)) / apq;
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double app = a.at(p, p), aqq = a.at(q, q);
        a.at(p, p) = app - t * apq;
        a.at(q, q) = aqq + t * apq;
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(p, k) = a.at(k, p);
          a.at(k, q) = s * akp + c * akq;
          a.at(q, k) = a.at(k, q);
        }
      }
    }
  }
  VecN ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a.at(i, i);
  std::sort(ev.v.begin(), ev.v.begin() + n);
  return ev;
}

}  // namespace gs
