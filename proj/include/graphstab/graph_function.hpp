#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "graphstab/dimension.hpp"
#include "graphstab/smallvec.hpp"

namespace gs {

// Derivative data of f: R^n -> R at one point. `grad_laplacian` is the only
// third-order contraction any consumer needs (see curvature.cpp); it is
// valid iff has_third. Implementations with analytic derivatives must fill
// everything analytically; sampled/opaque graphs fall back to finite
// differences (FiniteDifferenceGraph).
struct Jet {
  double f = 0.0;
  VecN grad;
  MatN hess;
  VecN grad_laplacian;
  bool has_third = false;
};

enum class GraphKind {
  entire,           // f defined on all of R^n
  minimal_boundary  // f defined outside finitely many balls, |Df| -> inf
                    // at each sphere, f constant on each sphere
};

// One excised ball. `plateau` is the constant boundary value of f on the
// sphere; the filled extension uses it inside the ball.
struct BoundaryBall {
  VecN center;
  double radius = 0.0;
  double plateau = 0.0;
};

class RadialProfile;  // radial_profile.hpp

// Immutable graph of a function over R^n (minus excised balls). All
// evaluation is const and thread-safe.
class GraphFunction {
 public:
  GraphFunction(Dimension dim, GraphKind kind,
                std::vector<BoundaryBall> boundary);
  virtual ~GraphFunction() = default;

  Dimension dim() const { return dim_; }
  GraphKind kind() const { return kind_; }
  const std::vector<BoundaryBall>& boundary() const { return boundary_; }

  bool in_domain(const VecN& x) const;
  // Throws PreconditionError outside the domain.
  Jet jet(const VecN& x) const;
  double value(const VecN& x) const { return jet(x).f; }
  // Filled extension: constant plateau value inside each excised ball.
  double value_extended(const VecN& x) const;

  // Limit of f at infinity; +inf when the graph is unbounded above.
  virtual double sup_height() const = 0;

  // Non-null when the graph is u(|x|) about the origin; enables the exact
  // rotational paths in the mass/levelset/flat-norm modules.
  virtual const RadialProfile* radial() const { return nullptr; }

 protected:
  virtual Jet jet_impl(const VecN& x) const = 0;

 private:
  Dimension dim_;
  GraphKind kind_;
  std::vector<BoundaryBall> boundary_;
};

using GraphPtr = std::shared_ptr<const GraphFunction>;

// Finite-difference fallback for graphs given only as a value callable.
// First/second derivatives use central differences with step
// cbrt(eps)*(1+|x|); the third-order contraction uses the wider step
// eps^(1/5)*(1+|x|) appropriate for third differences.
class FiniteDifferenceGraph : public GraphFunction {
 public:
  using Fn = std::function<double(const VecN&)>;
  FiniteDifferenceGraph(Dimension dim, Fn fn, double sup = 0.0);

  double sup_height() const override { return sup_; }

 protected:
  Jet jet_impl(const VecN& x) const override;

 private:
  Fn fn_;
  double sup_;
};

}  // namespace gs
