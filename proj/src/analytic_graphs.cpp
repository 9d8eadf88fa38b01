#include "graphstab/analytic_graphs.hpp"

#include <cmath>

#include "graphstab/errors.hpp"

namespace gs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void add_jet(Jet& lhs, const Jet& rhs) {
  const int n = lhs.grad.n;
  lhs.f += rhs.f;
  for (int i = 0; i < n; ++i) {
    lhs.grad[i] += rhs.grad[i];
    lhs.grad_laplacian[i] += rhs.grad_laplacian[i];
    for (int j = 0; j < n; ++j) lhs.hess.at(i, j) += rhs.hess.at(i, j);
  }
  lhs.has_third = lhs.has_third && rhs.has_third;
}

}  // namespace

RadialPtr paraboloid_profile(double c) {
  return std::make_shared<ExplicitRadial>(
      0.0, false, c >= 0.0, c > 0.0 ? kInf : 0.0,
      [c](double r) { return 0.5 * c * r * r; },
      [c](double r) { return c * r; }, [c](double) { return c; },
      [](double) { return 0.0; });
}

RadialPtr lower_hemisphere_profile(double radius) {
  if (!(radius > 0.0)) {
    throw PreconditionError("hemisphere radius must be positive");
  }
  const double R2 = radius * radius;
  return std::make_shared<ExplicitRadial>(
      0.0, false, true, 0.0,
      [R2](double r) { return -std::sqrt(R2 - r * r); },
      [R2](double r) { return r / std::sqrt(R2 - r * r); },
      [R2](double r) { return R2 * std::pow(R2 - r * r, -1.5); },
      [R2](double r) { return 3.0 * R2 * r * std::pow(R2 - r * r, -2.5); });
}

RadialPtr gaussian_bump_profile(double amplitude, double sigma) {
  if (!(sigma > 0.0)) {
    throw PreconditionError("gaussian width must be positive");
  }
  const double s2 = sigma * sigma;
  auto value = [amplitude, s2](double r) {
    return amplitude * std::exp(-0.5 * r * r / s2);
  };
  return std::make_shared<ExplicitRadial>(
      0.0, false, amplitude == 0.0, std::fmax(amplitude, 0.0), value,
      [value, s2](double r) { return -(r / s2) * value(r); },
      [value, s2](double r) {
        return (r * r / (s2 * s2) - 1.0 / s2) * value(r);
      },
      [value, s2](double r) {
        return (3.0 * r / (s2 * s2) - r * r * r / (s2 * s2 * s2)) * value(r);
      });
}

namespace {

class PlaneGraph : public GraphFunction {
 public:
  PlaneGraph(Dimension dim, const VecN& slope, double offset)
      : GraphFunction(dim, GraphKind::entire, {}),
        slope_(slope),
        offset_(offset) {
    if (slope.n != dim.n()) {
      throw PreconditionError("plane slope dimension mismatch");
    }
  }

  double sup_height() const override {
    return norm(slope_) == 0.0 ? offset_ : kInf;
  }

 protected:
  Jet jet_impl(const VecN& x) const override {
    Jet jet;
    jet.f = dot(slope_, x) + offset_;
    jet.grad = slope_;
    jet.hess = MatN(x.n);
    jet.grad_laplacian = VecN(x.n);
    jet.has_third = true;
    return jet;
  }

 private:
  VecN slope_;
  double offset_;
};

}  // namespace

GraphPtr make_plane_graph(Dimension dim, const VecN& slope, double offset) {
  return std::make_shared<PlaneGraph>(dim, slope, offset);
}

EllipsoidLevelGraph::EllipsoidLevelGraph(Dimension dim, const VecN& semiaxes)
    : GraphFunction(dim, GraphKind::entire, {}), semiaxes_(semiaxes) {
  if (semiaxes.n != dim.n()) {
    throw PreconditionError("ellipsoid semiaxis dimension mismatch");
  }
  for (int i = 0; i < semiaxes.n; ++i) {
    if (!(semiaxes[i] > 0.0)) {
      throw PreconditionError("ellipsoid semiaxes must be positive");
    }
  }
}

double EllipsoidLevelGraph::enclosed_volume(double h) const {
  if (h <= 0.0) return 0.0;
  const int n = dim().n();
  double prod = 1.0;
  for (int i = 0; i < n; ++i) prod *= semiaxes_[i];
  return Constants::at(dim()).beta * prod * std::pow(h, 0.5 * n);
}

Jet EllipsoidLevelGraph::jet_impl(const VecN& x) const {
  const int n = x.n;
  Jet jet;
  jet.f = 0.0;
  jet.grad = VecN(n);
  jet.hess = MatN(n);
  jet.grad_laplacian = VecN(n);
  jet.has_third = true;
  for (int i = 0; i < n; ++i) {
    const double inv2 = 1.0 / (semiaxes_[i] * semiaxes_[i]);
    jet.f += x[i] * x[i] * inv2;
    jet.grad[i] = 2.0 * x[i] * inv2;
    jet.hess.at(i, i) = 2.0 * inv2;
  }
  return jet;
}

BumpedRotationalGraph::BumpedRotationalGraph(Dimension dim, RadialPtr base,
                                             const VecN& center,
                                             double amplitude, double width)
    : GraphFunction(dim, radial_kind(*base), radial_boundary(dim, *base)),
      base_(std::move(base)),
      center_(center),
      amplitude_(amplitude),
      width_(width) {
  if (center.n != dim.n()) {
    throw PreconditionError("bump center dimension mismatch");
  }
  if (!(width > 0.0)) {
    throw PreconditionError("bump width must be positive");
  }
  if (base_->horizon_start() &&
      norm(center) - width <= base_->r_min() * (1.0 + 1e-9)) {
    throw PreconditionError("bump support overlaps the excised ball");
  }
}

double BumpedRotationalGraph::sup_height() const {
  const double sup = base_->sup_height();
  return std::isfinite(sup) ? sup + std::fmax(amplitude_, 0.0) : sup;
}

Jet BumpedRotationalGraph::jet_impl(const VecN& x) const {
  const int n = x.n;
  const double r = norm(x);
  Jet jet = radial_jet(n, x, base_->u(r), base_->du(r), base_->d2u(r),
                       base_->d3u(r), true);
  const VecN offset = x - center_;
  const double rho = norm(offset);
  if (rho < width_) {
    const double w2 = width_ * width_;
    const double q = 1.0 - rho * rho / w2;
    const double qp = -2.0 * rho / w2;
    const double qpp = -2.0 / w2;
    const double A = amplitude_;
    const double g0 = A * q * q * q * q;
    const double g1 = 4.0 * A * q * q * q * qp;
    const double g2 = 12.0 * A * q * q * qp * qp + 4.0 * A * q * q * q * qpp;
    const double g3 =
        24.0 * A * q * qp * qp * qp + 36.0 * A * q * q * qp * qpp;
    add_jet(jet, radial_jet(n, offset, g0, g1, g2, g3, true));
  }
  return jet;
}

AnisotropicDecayGraph::AnisotropicDecayGraph(Dimension dim, RadialPtr base,
                                             double c, double alpha,
                                             double eps)
    : GraphFunction(dim, radial_kind(*base), radial_boundary(dim, *base)),
      base_(std::move(base)),
      c_(c),
      alpha_(alpha),
      eps_(eps) {
  if (c != 0.0 && alpha < 2.0 && !(base_->r_min() > 0.0)) {
    throw PreconditionError(
        "power-law tail needs an excised ball to avoid the origin");
  }
}

double AnisotropicDecayGraph::sup_height() const {
  const double sup = base_->sup_height();
  if (!std::isfinite(sup) || c_ == 0.0) return sup;
  if (alpha_ > 0.0) return kInf;
  const double margin =
      std::fabs(c_) * (1.0 + std::fabs(eps_)) * std::pow(base_->r_min(), alpha_);
  return sup + margin;
}

Jet AnisotropicDecayGraph::jet_impl(const VecN& x) const {
  const int n = x.n;
  const double r = norm(x);
  Jet jet = radial_jet(n, x, base_->u(r), base_->du(r), base_->d2u(r),
                       base_->d3u(r), true);
  if (c_ == 0.0) return jet;

  const double a = alpha_;
  add_jet(jet, radial_jet(n, x, c_ * std::pow(r, a),
                          c_ * a * std::pow(r, a - 1.0),
                          c_ * a * (a - 1.0) * std::pow(r, a - 2.0),
                          c_ * a * (a - 1.0) * (a - 2.0) * std::pow(r, a - 3.0),
                          true));

  // k x_1 r^b term: gradient and Hessian expanded by hand; no third
  // derivatives, so downstream curvature uses the second-order route.
  const double k = c_ * eps_;
  const double b = a - 1.0;
  const double rb = std::pow(r, b);
  const double rb2 = b * std::pow(r, b - 2.0);
  const double rb4 = b * (b - 2.0) * std::pow(r, b - 4.0);
  Jet tail;
  tail.f = k * x[0] * rb;
  tail.grad = VecN(n);
  tail.hess = MatN(n);
  tail.grad_laplacian = VecN(n);
  tail.has_third = false;
  for (int i = 0; i < n; ++i) {
    tail.grad[i] = k * (x[0] * rb2 * x[i] + (i == 0 ? rb : 0.0));
    for (int j = 0; j < n; ++j) {
      double hij = x[0] * rb4 * x[i] * x[j];
      if (i == 0) hij += rb2 * x[j];
      if (j == 0) hij += rb2 * x[i];
      if (i == j) hij += x[0] * rb2;
      tail.hess.at(i, j) = k * hij;
    }
  }
  add_jet(jet, tail);
  return jet;
}

}  // namespace gs
