#pragma once

#include <functional>
#include <utility>

#include "graphstab/radial_profile.hpp"

namespace gs {

// Radial profile defined by closed-form callables. The factories below
// cover the standard smooth fixtures used in tests and studies.
class ExplicitRadial : public RadialProfile {
 public:
  using Fn = std::function<double(double)>;

  ExplicitRadial(double r_min, bool horizon_start, bool nondecreasing,
                 double sup, Fn u, Fn du, Fn d2u, Fn d3u)
      : RadialProfile(r_min, horizon_start, nondecreasing),
        sup_(sup),
        u_(std::move(u)),
        du_(std::move(du)),
        d2u_(std::move(d2u)),
        d3u_(std::move(d3u)) {}

  double u(double r) const override { return u_(r); }
  double du(double r) const override { return du_(r); }
  double d2u(double r) const override { return d2u_(r); }
  double d3u(double r) const override { return d3u_(r); }
  double sup_height() const override { return sup_; }

 private:
  double sup_;
  Fn u_, du_, d2u_, d3u_;
};

// u(r) = c r^2 / 2.
RadialPtr paraboloid_profile(double c);

// u(r) = -sqrt(R^2 - r^2): the lower hemisphere of the radius-R sphere,
// defined for r < R. Mean curvature n/R with respect to the upward normal.
RadialPtr lower_hemisphere_profile(double radius);

// u(r) = A exp(-r^2 / (2 sigma^2)).
RadialPtr gaussian_bump_profile(double amplitude, double sigma);

// f(x) = <slope, x> + offset.
GraphPtr make_plane_graph(Dimension dim, const VecN& slope, double offset);

// f(x) = sum_i (x_i / a_i)^2. Level sets are concentric ellipsoids with
// semiaxes a_i sqrt(h); the enclosed volume has the closed form
// beta_n (prod a_i) h^(n/2).
class EllipsoidLevelGraph : public GraphFunction {
 public:
  EllipsoidLevelGraph(Dimension dim, const VecN& semiaxes);

  double sup_height() const override {
    return std::numeric_limits<double>::infinity();
  }
  double enclosed_volume(double h) const;
  const VecN& semiaxes() const { return semiaxes_; }

 protected:
  Jet jet_impl(const VecN& x) const override;

 private:
  VecN semiaxes_;
};

// Rotational base plus a compactly supported radial bump about an
// off-center point: f(x) = u(|x|) + A (1 - (|x - c| / w)^2)^4 on
// |x - c| < w. The bump is C^3 across its support edge, so all curvature
// quantities stay continuous.
class BumpedRotationalGraph : public GraphFunction {
 public:
  BumpedRotationalGraph(Dimension dim, RadialPtr base, const VecN& center,
                        double amplitude, double width);

  double sup_height() const override;

 protected:
  Jet jet_impl(const VecN& x) const override;

 private:
  RadialPtr base_;
  VecN center_;
  double amplitude_;
  double width_;
};

// Rotational base plus an anisotropic power-law tail:
// f(x) = u(|x|) + c |x|^alpha (1 + eps x_1 / |x|). Models graphs whose
// deviation from the base decays (or grows) like a prescribed power.
// Second derivatives are closed form; third derivatives are not provided.
class AnisotropicDecayGraph : public GraphFunction {
 public:
  AnisotropicDecayGraph(Dimension dim, RadialPtr base, double c, double alpha,
                        double eps);

  double sup_height() const override;

 protected:
  Jet jet_impl(const VecN& x) const override;

 private:
  RadialPtr base_;
  double c_;
  double alpha_;
  double eps_;
};

}  // namespace gs
