#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "graphstab/radial_profile.hpp"

namespace gs {

// Radius of the sphere where the Schwarzschild height profile starts:
// (2m)^(1/(n-2)).
double schwarzschild_horizon_radius(Dimension dim, double mass);

// Height profile of the Schwarzschild graph of mass m in R^(n+1): the
// rotational solution of S'(r) = (r^(n-2)/(2m) - 1)^(-1/2) with S = 0 on
// the horizon sphere. Closed forms in n = 3 and 4; higher dimensions
// integrate the slope. Unbounded for n <= 4, bounded for n >= 5 with a
// certified height limit.
class SchwarzschildProfile : public IntegratedRadial {
 public:
  SchwarzschildProfile(Dimension dim, double mass);

  double u(double r) const override;
  double du(double r) const override;
  double d2u(double r) const override;
  double d3u(double r) const override;
  double sup_height() const override;

  double mass() const { return mass_; }
  Dimension graph_dim() const { return dim_; }

  // Two-sided enclosure of the height limit (n >= 5 only): value is the
  // midpoint, half_width bounds the enclosure radius.
  struct HeightLimit {
    double value;
    double half_width;
  };
  HeightLimit height_limit() const;

 protected:
  double du_gap(double gap) const override;

 private:
  Dimension dim_;
  double mass_;
  double horizon_;
  mutable std::once_flag limit_once_;
  mutable HeightLimit limit_{0.0, 0.0};
};

RadialPtr make_schwarzschild_profile(Dimension dim, double mass);
GraphPtr make_schwarzschild_graph(Dimension dim, double mass);

// Nondecreasing mass aggregate m(r) with two derivatives; prescribes the
// quasilocal mass of a rotational graph via profile_from_mass.
class MassProfile {
 public:
  virtual ~MassProfile() = default;
  virtual double m(double r) const = 0;
  virtual double dm(double r) const = 0;
  virtual double d2m(double r) const = 0;
  virtual double mass_at_infinity() const = 0;
  virtual bool nondecreasing() const = 0;
};

using MassPtr = std::shared_ptr<const MassProfile>;

MassPtr make_constant_mass(double mass);

// base + sum_k amplitude_k * (1 + tanh((r - center_k)/width_k)) / 2.
// Nondecreasing iff every amplitude is >= 0; negative amplitudes are
// allowed to build fixtures that violate nonnegative scalar curvature.
struct MassStep {
  double amplitude;
  double center;
  double width;
};
MassPtr make_step_mass(double base, std::vector<MassStep> steps);

// Monotone cubic (Fritsch-Carlson) interpolant of sampled (r, m) pairs,
// constant beyond the sample range. Rejects decreasing samples.
MassPtr make_pchip_mass(std::vector<double> r, std::vector<double> m);

// CSV with two numeric columns r,m (optional header line).
MassPtr load_mass_csv(const std::string& path);

// Rotational profile with prescribed mass aggregate:
// u'(r) = sqrt(2 m(r) / (r^(n-2) - 2 m(r))) for r >= r_min, u(r_min) = 0.
// Requires the horizon compatibility 2 m(r_min) = r_min^(n-2) and
// 2 m(r) < r^(n-2) beyond; the scalar curvature of the resulting graph is
// 2 (n-1) m'(r) r^(1-n).
RadialPtr profile_from_mass(Dimension dim, MassPtr mass, double r_min);

// Estimated asymptotics of a nondecreasing profile: the mass m such that
// u(r) - S_m(r) converges, the limit lambda of that difference, and the
// fitted power-law rate |u - S_m - lambda| ~ r^(-rate). residual reports
// the extrapolation discrepancy; rate is +inf when the profile matches the
// envelope exactly within roundoff.
struct AsymptoticFit {
  double mass;
  double lambda;
  double rate;
  double residual;
};
AsymptoticFit fit_schwarzschild_asymptotics(Dimension dim,
                                            const RadialProfile& profile,
                                            double r_hi);

// Certified asymptotic regime of a (not necessarily rotational) graph:
// estimates the total mass by the flux ladder and the vertical offset
// lambda by a large-radius median of f - S_m, then verifies
//   |f(x) - (lambda + S_m(|x|))| <= gamma |x|^alpha
// on a dense sample of the annulus r0 < |x| <= r_check. Requires
// alpha < 2 - n/2 (faster than the mass term's own correction, so mass and
// offset are both pinned down), a positive converged mass, and r0 at or
// beyond the excised region.
struct AsymptoticCheck {
  bool pass = false;
  double lambda = 0.0;
  double mass = 0.0;
  double max_violation = 0.0;  // max of |f - lambda - S_m| - gamma |x|^alpha
  double r_check = 0.0;
};
AsymptoticCheck asymptotic_schwarzschild_check(const GraphFunction& f,
                                               double r0, double gamma,
                                               double alpha);

}  // namespace gs
