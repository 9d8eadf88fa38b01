#include "graphstab/gridcoarea.hpp"

#include <cmath>
#include <vector>

#include "graphstab/errors.hpp"
#include "graphstab/io.hpp"
#include "graphstab/parallel.hpp"
#include "graphstab/quadrature.hpp"
#include "graphstab/sampling.hpp"

namespace gs {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_box(const GraphFunction& graph, const GridBox& box) {
  if (graph.dim().n() != 3)
    throw PreconditionError(
        "grid coarea integrals are implemented for dimension 3 only");
  if (box.center.n != 3)
    throw PreconditionError("grid box center must be a 3-vector");
  if (!(box.half_width > 0.0))
    throw PreconditionError("grid box half_width must be positive");
  if (box.cells < 8)
    throw PreconditionError("grid box needs at least 8 cells per axis");
}

// Cosine bump on [-eps, eps] with unit integral.
double mollifier(double t, double eps) {
  if (std::fabs(t) >= eps) return 0.0;
  return (1.0 + std::cos(kPi * t / eps)) / (2.0 * eps);
}

// Sums fn over all cell midpoints, one x-slab per task so the reduction
// tree is fixed by the grid shape alone.
double sum_over_midpoints(const GridBox& box, int threads,
                          const std::function<double(const VecN&)>& fn) {
  int cells = box.cells;
  double dx = 2.0 * box.half_width / cells;
  std::vector<double> slab(static_cast<size_t>(cells), 0.0);
  parallel_for(cells, threads, [&](int i) {
    KahanSum acc;
    VecN x(3);
    x[0] = box.center[0] - box.half_width + (i + 0.5) * dx;
    for (int j = 0; j < cells; ++j) {
      x[1] = box.center[1] - box.half_width + (j + 0.5) * dx;
      for (int k = 0; k < cells; ++k) {
        x[2] = box.center[2] - box.half_width + (k + 0.5) * dx;
        acc.add(fn(x));
      }
    }
    slab[static_cast<size_t>(i)] = acc.value();
  });
  return pairwise_sum(slab) * (dx * dx * dx);
}

}  // namespace

double level_bounding_radius(const GraphFunction& graph, double h) {
  int n = graph.dim().n();
  double start = 1.0;
  for (const auto& ball : graph.boundary())
    start = std::fmax(start, 2.0 * (norm(ball.center) + ball.radius));

  // Margin requiring the whole sampled sphere to clear h, not merely touch
  // it, so the returned radius stays clear of the level set itself.
  auto clears = [&](double r) {
    for (uint64_t i = 0; i < 128; ++i) {
      VecN x = r * halton_direction(n, i);
      if (!graph.in_domain(x)) return false;
      if (graph.value(x) <= h) return false;
    }
    return true;
  };

  double r = start;
  for (int step = 0; step < 40; ++step) {
    if (clears(r) && clears(1.5 * r)) return 1.5 * r;
    r *= 2.0;
  }
  throw ConvergenceError(
      "no sphere enclosing the level set was found; the level may exceed "
      "the graph's range");
}

GridBox level_box(const GraphFunction& graph, double h, int cells) {
  double r;
  try {
    r = level_bounding_radius(graph, h);
  } catch (const ConvergenceError&) {
    throw PreconditionError(
        "level " + format_double(h) +
        " is not enclosed by any sphere; grid level-set operations need a "
        "closed level set");
  }
  GridBox box;
  box.center = VecN(graph.dim().n());
  box.half_width = r;
  box.cells = cells;
  return box;
}

LevelScan scan_level(const GraphFunction& graph, const GridBox& box,
                     double h) {
  check_box(graph, box);
  const int cells = 48;
  const double dx = 2.0 * box.half_width / cells;

  std::vector<double> values(static_cast<size_t>(cells * cells * cells));
  double grad_bound = 0.0;
  LevelScan scan;
  VecN x(3);
  for (int i = 0; i < cells; ++i) {
    x[0] = box.center[0] - box.half_width + (i + 0.5) * dx;
    for (int j = 0; j < cells; ++j) {
      x[1] = box.center[1] - box.half_width + (j + 0.5) * dx;
      for (int k = 0; k < cells; ++k) {
        x[2] = box.center[2] - box.half_width + (k + 0.5) * dx;
        double f = graph.value_extended(x);
        values[static_cast<size_t>((i * cells + j) * cells + k)] = f;
        scan.f_min = std::fmin(scan.f_min, f);
        scan.f_max = std::fmax(scan.f_max, f);
        if (i % 4 == 2 && j % 4 == 2 && k % 4 == 2 && graph.in_domain(x))
          grad_bound = std::fmax(grad_bound, norm(graph.jet(x).grad));
      }
    }
  }

  double band = 4.0 * dx * (1.0 + grad_bound);
  for (int i = 0; i < cells; ++i) {
    x[0] = box.center[0] - box.half_width + (i + 0.5) * dx;
    for (int j = 0; j < cells; ++j) {
      x[1] = box.center[1] - box.half_width + (j + 0.5) * dx;
      for (int k = 0; k < cells; ++k) {
        double f = values[static_cast<size_t>((i * cells + j) * cells + k)];
        if (std::fabs(f - h) >= band) continue;
        x[2] = box.center[2] - box.half_width + (k + 0.5) * dx;
        if (!graph.in_domain(x)) continue;
        scan.found = true;
        scan.min_gradient =
            std::fmin(scan.min_gradient, norm(graph.jet(x).grad));
      }
    }
  }
  return scan;
}

double grid_region_integral(
    const GraphFunction& graph, const GridBox& box,
    const std::function<double(const VecN&, double)>& weight, int threads) {
  check_box(graph, box);
  return sum_over_midpoints(box, threads, [&](const VecN& x) {
    return weight(x, graph.value_extended(x));
  });
}

double grid_level_integral(
    const GraphFunction& graph, const GridBox& box, double h,
    const std::function<double(const VecN&, const Jet&)>& weight,
    int threads) {
  check_box(graph, box);
  double dx = 2.0 * box.half_width / box.cells;

  // The mollified integrand only needs jets inside the |f - h| < eps shell;
  // everywhere else the cheap filled value rejects the point. Points inside
  // an excised ball carry a constant filled value, so they only pass the
  // shell test when the plateau itself is near h, and then |Df| = 0 would be
  // the correct (zero) contribution; skip them explicitly.
  auto narrow_band = [&](double eps) {
    return sum_over_midpoints(box, threads, [&, eps](const VecN& x) {
      if (!graph.in_domain(x)) return 0.0;
      double f = graph.value_extended(x);
      if (std::fabs(f - h) >= eps) return 0.0;
      Jet jet = graph.jet(x);
      return weight(x, jet) * mollifier(jet.f - h, eps) * norm(jet.grad);
    });
  };

  // O(eps^2) mollification error: one Richardson step across eps and 2*eps.
  double fine = narrow_band(2.0 * dx);
  double coarse = narrow_band(4.0 * dx);
  return fine + (fine - coarse) / 3.0;
}

}  // namespace gs
