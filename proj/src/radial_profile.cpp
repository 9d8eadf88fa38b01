#include "graphstab/radial_profile.hpp"

#include <cmath>

#include "graphstab/errors.hpp"
#include "graphstab/quadrature.hpp"

namespace gs {

double RadialProfile::r_of_h(double h) const {
  if (!nondecreasing_) {
    throw PreconditionError(
        "r_of_h requires a nondecreasing height profile");
  }
  const double u0 = u(r_min_);
  if (h < u0) {
    throw PreconditionError("level height lies below the profile minimum");
  }
  if (h == u0) return r_min_;
  const double sup = sup_height();
  if (std::isfinite(sup) && h >= sup) {
    throw PreconditionError("level height is not attained by the profile");
  }

  double lo = r_min_;
  double hi = std::fmax(2.0 * r_min_, r_min_ + 1.0);
  while (u(hi) < h) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e14) {
      throw ConvergenceError("level height bracket exceeded radius cap");
    }
  }

  // Safeguarded Newton: bisection every other step guarantees the bracket
  // halves, Newton polishes once the slope is trustworthy.
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 160; ++iter) {
    const double fx = u(x) - h;
    if (fx > 0.0) {
      hi = x;
    } else if (fx < 0.0) {
      lo = x;
    } else {
      return x;
    }
    if (hi - lo < 1e-15 * (1.0 + hi)) break;
    if (iter % 2 == 0) {
      const double slope = du(x);
      const double step = fx / slope;
      const double cand = x - step;
      x = (std::isfinite(cand) && cand > lo && cand < hi)
              ? cand
              : 0.5 * (lo + hi);
    } else {
      x = 0.5 * (lo + hi);
    }
  }
  return 0.5 * (lo + hi);
}

double IntegratedRadial::u(double r) const {
  const double rm = r_min();
  if (r <= rm) return 0.0;
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto it = memo_.find(r);
    if (it != memo_.end()) return it->second;
  }
  // r = r_min + t^2 turns a (r - r_min)^(-1/2) slope blow-up into a
  // bounded integrand. The floor keeps the t = 0 endpoint off the literal
  // horizon, where the slope evaluates to inf; the integrand extends
  // continuously there, so the clamp costs O(t_floor^3).
  const double tmax = std::sqrt(r - rm);
  const double t_floor = std::fmin(1e-6, 0.5 * tmax);
  const double value = adaptive_simpson(
      [&](double t) {
        const double ts = std::fmax(t, t_floor);
        return 2.0 * ts * du_gap(ts * ts);
      },
      0.0, tmax, 1e-13, 1e-12);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    memo_.emplace(r, value);
  }
  return value;
}

ShiftedRadial::ShiftedRadial(RadialPtr base, double shift)
    : RadialProfile(base->r_min(), base->horizon_start(),
                    base->nondecreasing()),
      base_(std::move(base)),
      shift_(shift) {}

double ShiftedRadial::sup_height() const {
  const double sup = base_->sup_height();
  return std::isfinite(sup) ? sup - shift_ : sup;
}

ScaledRadial::ScaledRadial(RadialPtr base, double lambda, double shift)
    : RadialProfile(base->r_min() / lambda, base->horizon_start(),
                    base->nondecreasing()),
      base_(std::move(base)),
      lambda_(lambda),
      shift_(shift) {
  if (!(lambda > 0.0)) {
    throw PreconditionError("rescale factor must be positive");
  }
}

double ScaledRadial::sup_height() const {
  const double sup = base_->sup_height();
  return std::isfinite(sup) ? (sup - shift_) / lambda_ : sup;
}

Jet radial_jet(int n, const VecN& offset, double g0, double g1, double g2,
               double g3, bool has_third) {
  Jet jet;
  jet.f = g0;
  jet.grad = VecN(n);
  jet.hess = MatN(n);
  jet.grad_laplacian = VecN(n);
  jet.has_third = has_third;

  const double r = norm(offset);
  if (r < 1e-12) {
    // Symmetric limit at the center (requires g1(0) = 0): the Hessian is
    // g2 * I and odd-order directional data vanish.
    for (int i = 0; i < n; ++i) jet.hess.at(i, i) = g2;
    return jet;
  }

  const double g1_over_r = g1 / r;
  for (int i = 0; i < n; ++i) {
    const double xi = offset[i] / r;
    jet.grad[i] = g1 * xi;
    for (int j = 0; j < n; ++j) {
      const double xj = offset[j] / r;
      jet.hess.at(i, j) = (g2 - g1_over_r) * xi * xj;
    }
    jet.hess.at(i, i) += g1_over_r;
  }
  if (has_third) {
    const double dlap = g3 + (n - 1) * (g2 - g1_over_r) / r;
    for (int i = 0; i < n; ++i) {
      jet.grad_laplacian[i] = dlap * offset[i] / r;
    }
  }
  return jet;
}

GraphKind radial_kind(const RadialProfile& profile) {
  return profile.horizon_start() ? GraphKind::minimal_boundary
                                 : GraphKind::entire;
}

std::vector<BoundaryBall> radial_boundary(Dimension dim,
                                          const RadialProfile& profile) {
  if (!profile.horizon_start()) return {};
  BoundaryBall ball;
  ball.center = VecN(dim.n());
  ball.radius = profile.r_min();
  ball.plateau = profile.u(profile.r_min());
  return {ball};
}

RotationalGraph::RotationalGraph(Dimension dim, RadialPtr profile)
    : GraphFunction(dim, radial_kind(*profile),
                    radial_boundary(dim, *profile)),
      profile_(std::move(profile)) {}

Jet RotationalGraph::jet_impl(const VecN& x) const {
  const double r = norm(x);
  return radial_jet(dim().n(), x, profile_->u(r), profile_->du(r),
                    profile_->d2u(r), profile_->d3u(r), true);
}

GraphPtr make_rotational_graph(Dimension dim, RadialPtr profile) {
  return std::make_shared<RotationalGraph>(dim, std::move(profile));
}

}  // namespace gs
