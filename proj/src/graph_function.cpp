#include "graphstab/graph_function.hpp"

#include <cfloat>
#include <cmath>
#include <functional>

#include "graphstab/errors.hpp"

namespace gs {

GraphFunction::GraphFunction(Dimension dim, GraphKind kind,
                             std::vector<BoundaryBall> boundary)
    : dim_(dim), kind_(kind), boundary_(std::move(boundary)) {
  if (kind_ == GraphKind::minimal_boundary && boundary_.empty())
    throw PreconditionError("minimal_boundary graph without boundary balls");
  if (kind_ == GraphKind::entire && !boundary_.empty())
    throw PreconditionError("entire graph with boundary balls");
}

bool GraphFunction::in_domain(const VecN& x) const {
  for (const auto& b : boundary_)
    if (norm(x - b.center) <= b.radius) return false;
  return true;
}

Jet GraphFunction::jet(const VecN& x) const {
  if (x.n != dim_.n())
    throw PreconditionError("point dimension mismatch");
  if (!in_domain(x))
    throw PreconditionError("point inside an excised boundary ball");
  return jet_impl(x);
}

double GraphFunction::value_extended(const VecN& x) const {
  for (const auto& b : boundary_)
    if (norm(x - b.center) <= b.radius) return b.plateau;
  return jet_impl(x).f;
}

FiniteDifferenceGraph::FiniteDifferenceGraph(Dimension dim, Fn fn, double sup)
    : GraphFunction(dim, GraphKind::entire, {}), fn_(std::move(fn)),
      sup_(sup) {}

Jet FiniteDifferenceGraph::jet_impl(const VecN& x) const {
  const int n = dim().n();
  const double scale = 1.0 + norm(x);
  const double h = std::cbrt(DBL_EPSILON) * scale;
  Jet j;
  j.grad = VecN(n);
  j.hess = MatN(n);
  j.grad_laplacian = VecN(n);
  j.f = fn_(x);
  for (int i = 0; i < n; ++i) {
    VecN xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    double fp = fn_(xp), fm = fn_(xm);
    j.grad[i] = (fp - fm) / (2.0 * h);
    j.hess.at(i, i) = (fp - 2.0 * j.f + fm) / (h * h);
  }
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) {
      VecN a = x, b = x, c = x, d = x;
      a[i] += h; a[k] += h;
      b[i] += h; b[k] -= h;
      c[i] -= h; c[k] += h;
      d[i] -= h; d[k] -= h;
      double v = (fn_(a) - fn_(b) - fn_(c) + fn_(d)) / (4.0 * h * h);
      j.hess.at(i, k) = v;
      j.hess.at(k, i) = v;
    }
  // Third-order contraction: central difference of the discrete Laplacian
  // with the wider step (third differences lose more bits).
  const double H = std::pow(DBL_EPSILON, 0.2) * scale;
  auto lap = [&](const VecN& p) {
    double f0 = fn_(p), s = 0.0;
    for (int i = 0; i < n; ++i) {
      VecN pp = p, pm = p;
      pp[i] += H;
      pm[i] -= H;
      s += (fn_(pp) - 2.0 * f0 + fn_(pm)) / (H * H);
    }
    return s;
  };
  for (int k = 0; k < n; ++k) {
    VecN xp = x, xm = x;
    xp[k] += H;
    xm[k] -= H;
    j.grad_laplacian[k] = (lap(xp) - lap(xm)) / (2.0 * H);
  }
  j.has_third = true;
  return j;
}

}  // namespace gs
