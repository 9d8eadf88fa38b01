#pragma once

#include <functional>
#include <span>
#include <vector>

#include "graphstab/dimension.hpp"
#include "graphstab/smallvec.hpp"

namespace gs {

struct GLNode {
  double x;  // node on [-1,1]
  double w;
};

// Gauss-Legendre rule of the given order, cached per order. Thread-safe.
const std::vector<GLNode>& gauss_legendre(int order);

// Integral of fn over the sphere |x| = radius in R^n with respect to
// surface measure. Product rule: Gauss-Legendre in the n-2 polar angles,
// equispaced (trapezoidal) nodes in the periodic angle. The per-angle node
// count is doubled from 4 until two successive refinements agree to
// max(abs_tol, rel_tol*|I|); throws ConvergenceError past max_order.
//
// Evaluation order is fixed and the reduction is sequential compensated
// summation, so results do not depend on thread count (quadrature itself
// never spawns threads; parallelism lives at the task level).
//
// min_order raises the first refinement level; callers integrating small
// localized features pass a min_order the feature cannot slip through,
// since two coarse passes agreeing would otherwise end the doubling early.
struct SphereQuadratureResult {
  double value;
  double error_estimate;  // |last refinement delta|
  int order;              // nodes per angle actually used
};

SphereQuadratureResult integrate_sphere(
    Dimension dim, double radius,
    const std::function<double(const VecN&)>& fn, double abs_tol = 1e-10,
    double rel_tol = 1e-10, int max_order = 64, int min_order = 4);

// Adaptive Simpson on [a,b]. Throws ConvergenceError when the recursion
// depth budget is exhausted before the tolerance is met.
double adaptive_simpson(const std::function<double(double)>& fn, double a,
                        double b, double abs_tol, double rel_tol,
                        int max_depth = 48);

// Composite Gauss-Legendre with fixed order and panel count; no adaptivity.
double integrate_gl(const std::function<double(double)>& fn, double a,
                    double b, int order, int panels = 1);

// Deterministic pairwise reduction of per-task partial results. The tree
// shape depends only on the length, never on thread scheduling.
double pairwise_sum(std::span<const double> xs);

// A + beta 2^(-q k) fitted through three samples a1, a2, a3 taken at
// parameter values in geometric ratio 2 (radii r, 2r, 4r; grid refinements
// N, 2N, 4N). Returns the extrapolated limit A and the rate q; rate = +inf
// flags samples already constant to roundoff, rate = 0 flags no decay (the
// limit then falls back to the last sample).
struct PowerFit {
  double limit;
  double rate;
};

PowerFit power_extrapolate(double a1, double a2, double a3);

// Compensated (Kahan) accumulator for long fixed-order loops.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace gs
