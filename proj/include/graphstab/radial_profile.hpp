#pragma once

#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "graphstab/graph_function.hpp"

namespace gs {

// Height profile u(r) of a rotationally symmetric graph f(x) = u(|x|),
// with analytic radial derivatives. horizon_start means u' blows up like
// (r - r_min)^(-1/2) at r_min and the graph has minimal boundary there.
class RadialProfile {
 public:
  RadialProfile(double r_min, bool horizon_start, bool nondecreasing)
      : r_min_(r_min), horizon_start_(horizon_start),
        nondecreasing_(nondecreasing) {}
  virtual ~RadialProfile() = default;

  virtual double u(double r) const = 0;
  virtual double du(double r) const = 0;
  virtual double d2u(double r) const = 0;
  virtual double d3u(double r) const = 0;
  virtual double sup_height() const = 0;  // +inf when unbounded

  double r_min() const { return r_min_; }
  bool horizon_start() const { return horizon_start_; }
  bool nondecreasing() const { return nondecreasing_; }

  // Monotone inverse: the radius with u(r) = h. Requires nondecreasing()
  // and u(r_min) < h < sup_height().
  double r_of_h(double h) const;

 private:
  double r_min_;
  bool horizon_start_;
  bool nondecreasing_;
};

using RadialPtr = std::shared_ptr<const RadialProfile>;

// Profile whose height is reconstructed from its slope: u(r) is the
// integral of du from r_min, evaluated with the substitution r = r_min+t^2
// so horizon-start slopes integrate cleanly. Values are memoized per exact
// radius, so results are independent of evaluation order.
class IntegratedRadial : public RadialProfile {
 public:
  IntegratedRadial(double r_min, bool horizon_start, bool nondecreasing)
      : RadialProfile(r_min, horizon_start, nondecreasing) {}

  double u(double r) const override;

 protected:
  // Slope as a function of the exact gap r - r_min. Horizon-start
  // subclasses override this with a cancellation-free form so the height
  // integral keeps full precision arbitrarily close to r_min.
  virtual double du_gap(double gap) const { return du(r_min() + gap); }

 private:
  mutable std::mutex memo_mutex_;
  mutable std::map<double, double> memo_;
};

// u(r) - shift (vertical translation; used to normalize a chosen level to
// height zero).
class ShiftedRadial : public RadialProfile {
 public:
  ShiftedRadial(RadialPtr base, double shift);
  double u(double r) const override { return base_->u(r) - shift_; }
  double du(double r) const override { return base_->du(r); }
  double d2u(double r) const override { return base_->d2u(r); }
  double d3u(double r) const override { return base_->d3u(r); }
  double sup_height() const override;

 private:
  RadialPtr base_;
  double shift_;
};

// (u(lambda r) - shift)/lambda: the profile of the rescaled graph
// f~(x) = (f(lambda x) - shift)/lambda.
class ScaledRadial : public RadialProfile {
 public:
  ScaledRadial(RadialPtr base, double lambda, double shift);
  double u(double r) const override {
    return (base_->u(lambda_ * r) - shift_) / lambda_;
  }
  double du(double r) const override { return base_->du(lambda_ * r); }
  double d2u(double r) const override {
    return lambda_ * base_->d2u(lambda_ * r);
  }
  double d3u(double r) const override {
    return lambda_ * lambda_ * base_->d3u(lambda_ * r);
  }
  double sup_height() const override;

 private:
  RadialPtr base_;
  double lambda_;
  double shift_;
};

// Jet of x -> g(|x - center|) from radial derivatives. Smooth-at-zero
// profiles (g'(0) = 0) get the symmetric limit at the center.
Jet radial_jet(int n, const VecN& offset, double g0, double g1, double g2,
               double g3, bool has_third);

// Graph kind and boundary data induced by a profile: horizon-start
// profiles carry one excised ball at the origin with the plateau height.
GraphKind radial_kind(const RadialProfile& profile);
std::vector<BoundaryBall> radial_boundary(Dimension dim,
                                          const RadialProfile& profile);

// Graph f(x) = u(|x|). Horizon-start profiles produce a minimal-boundary
// graph with the excised ball |x| <= r_min and plateau u(r_min).
class RotationalGraph : public GraphFunction {
 public:
  RotationalGraph(Dimension dim, RadialPtr profile);

  double sup_height() const override { return profile_->sup_height(); }
  const RadialProfile* radial() const override { return profile_.get(); }

 protected:
  Jet jet_impl(const VecN& x) const override;

 private:
  RadialPtr profile_;
};

GraphPtr make_rotational_graph(Dimension dim, RadialPtr profile);

}  // namespace gs
