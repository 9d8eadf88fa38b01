#pragma once

#include <functional>
#include <limits>

#include "graphstab/graph_function.hpp"

namespace gs {

// Uniform cubic grid over [center - half_width, center + half_width]^3
// with `cells` midpoint cells per axis. Only n = 3 graphs are supported:
// grid integrals in higher dimensions are outside the resolution budget.
struct GridBox {
  VecN center;
  double half_width = 0.0;
  int cells = 96;
};

// Midpoint-rule integral of weight(x, f_filled(x)) over the box. The
// weight sees the filled extension (plateau values inside excised balls),
// so region indicators like "f < h" extend across the boundary the way
// enclosed-region volumes require. Deterministic for any thread count:
// per-slab compensated partials merged by a fixed pairwise tree.
double grid_region_integral(
    const GraphFunction& graph, const GridBox& box,
    const std::function<double(const VecN&, double)>& weight,
    int threads = 1);

// Radius R with the level set {f = h} contained in |x| < R, found by
// doubling a probe sphere until sampled values clear h on it and on the
// next sphere out. Works in any dimension (sampling, no grid). Assumes the
// graph increases toward its sup at infinity, as asymptotically flat graphs
// of positive mass do; throws ConvergenceError when no enclosing sphere is
// found within the doubling budget.
double level_bounding_radius(const GraphFunction& graph, double h);

// Grid box centered at the origin sized to enclose the level set {f = h},
// via level_bounding_radius. Throws PreconditionError when no enclosing
// sphere exists (level above the graph's range, or non-closed level sets).
GridBox level_box(const GraphFunction& graph, double h, int cells = 96);

// Coarse classification of the level {f = h} inside the box: whether any
// near-surface points exist, the least |Df| seen among them, and the range
// of filled values over the box. The near-surface band is widened by an
// estimated gradient bound so steep level sets cannot slip between grid
// points.
struct LevelScan {
  bool found = false;
  double min_gradient = std::numeric_limits<double>::infinity();
  double f_min = std::numeric_limits<double>::infinity();
  double f_max = -std::numeric_limits<double>::infinity();
};

LevelScan scan_level(const GraphFunction& graph, const GridBox& box, double h);

// Integral of weight(x, jet) over the level set {f = h} against surface
// measure, via the mollified coarea identity
//   int weight * delta_eps(f - h) * |Df| dx,
// with the cosine bump delta_eps and Richardson extrapolation over
// eps = 2*dx and 4*dx (the mollification error is O(eps^2)). Jets are only
// evaluated inside the |f - h| < eps shell. Points inside excised balls
// never contribute (f is constant there in the filled extension).
double grid_level_integral(
    const GraphFunction& graph, const GridBox& box, double h,
    const std::function<double(const VecN&, const Jet&)>& weight,
    int threads = 1);

}  // namespace gs
