#pragma once

#include <filesystem>
#include <vector>

#include "graphstab/graph_function.hpp"

namespace gs {

// Verdict of the outward-minimizing sufficient condition at one level.
// "convex": the projected Hessian of f was positive definite on the level
// set's tangent spaces at every sample. "star_shaped": not verifiably
// convex, but <x, Df> > 0 at every sample with strictly positive mean
// curvature. "unknown": neither check passed; quantities still compute but
// inequality verdicts that need outward-minimizing refuse to run.
enum class ConvexityFlag { convex, star_shaped, unknown };

// Per-level data of the level set {f = h} in R^n. `volume` is the
// (n-1)-dimensional surface measure |Sigma_h| and `first_variation` its
// derivative in h, computed as the integral of H/|Df| over the level set
// (never by differencing volumes). An empty level set yields a zero slice
// with min_abs_gradient = +inf.
struct LevelSetSlice {
  double h = 0.0;
  double volume = 0.0;
  double total_mean_curvature = 0.0;  // integral of H over the level set
  double first_variation = 0.0;       // integral of H/|Df|
  double min_abs_gradient = 0.0;
  ConvexityFlag convexity = ConvexityFlag::unknown;
  bool strict_mean_convex = false;
  bool regular = false;  // min_abs_gradient above the regularity floor
};

// Volume-function table over a family of levels, ascending in h.
struct LevelSample {
  double h = 0.0;
  double volume = 0.0;
  double v_prime = 0.0;
  bool regular = false;
  bool convex_verified = false;
};

struct VolumeFunction {
  std::vector<LevelSample> samples;
  double h_max = 0.0;    // limit of f at infinity; +inf when unbounded
  bool monotone = false;  // volume nondecreasing across regular samples
};

// Evaluates the slice at one level. Rotational graphs with nondecreasing
// profiles get the exact round-sphere values at r = r_of_h(h); general
// graphs (dimension 3) go through the mollified coarea grid. Levels at or
// above sup_height are errors; levels below the graph's minimum give the
// empty slice.
LevelSetSlice level_volume(const GraphFunction& graph, double h);

// Slices at the given levels (computed in parallel, merged in h order)
// plus the monotonicity verdict across regular samples.
VolumeFunction volume_function(const GraphFunction& graph,
                               std::vector<double> levels, int threads = 1);

// sup{h : |Sigma_h| <= 2 omega_{n-1} (2m)^((n-1)/(n-2))}. The monotone
// volume function justifies locating it by bracketing and bisection; on
// rotational graphs the crossing radius is closed form. Returns -inf when
// even the lowest admissible level exceeds the threshold; throws
// PreconditionError when no level within the graph's range exceeds it.
double h_zero(const GraphFunction& graph, double mass);

// The threshold area used by h_zero: twice the horizon area of mass m.
double h_zero_threshold(Dimension dim, double mass);

// int_{Sigma_h} H - (c_n/2) (V/omega_{n-1})^((n-2)/(n-1)): the Minkowski
// inequality gap, zero exactly on round spheres. Requires the slice to be
// strictly mean-convex with the outward-minimizing sufficient condition
// verified (convex, or star-shaped with positive H).
double minkowski_gap(const LevelSetSlice& slice, Dimension dim);

// V'(h) - (1/alpha) [int H - (1 + alpha^-2) c_n m]: the gradient-threshold
// volume growth inequality; positive for every alpha > 0 on graphs with
// nonnegative scalar curvature. h must be a regular value.
double volume_inequality_residual(const GraphFunction& graph, double h,
                                  double alpha, double mass);

// The alpha maximizing the right side above at fixed volume:
// sqrt(3) [ (1/2m) (V/omega_{n-1})^((n-2)/(n-1)) - 1 ]^(-1/2).
// Requires V strictly above the horizon area omega_{n-1}(2m)^((n-1)/(n-2)).
double optimal_alpha(double volume, double mass, Dimension dim);

// V'(h) - c_n (2m/(3 sqrt 3)) [ (1/2m)(V/omega_{n-1})^((n-2)/(n-1)) - 1 ]^(3/2):
// the self-contained volume growth inequality obtained at the optimal
// alpha. Preconditions as for minkowski_gap plus V at or above the horizon
// area.
double volume2_residual(const GraphFunction& graph, double h, double mass);

// CSV table (h, V, Vprime, regular, convex_verified).
void write_volume_csv(const VolumeFunction& vf,
                      const std::filesystem::path& path);

}  // namespace gs
