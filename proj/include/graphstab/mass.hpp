#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graphstab/graph_function.hpp"

namespace gs {

// Boundary flux readings along the doubling radius ladder r_k = r0 * 2^k.
// flux_values are already mass-normalized (divided by c_n), so for an
// asymptotically flat graph they converge to the total mass. On graphs with
// nonnegative scalar curvature the readings are nondecreasing in r up to
// quadrature error; `monotone` records that verdict and `worst_step` the
// most negative increment seen (0 when none).
struct FluxSeries {
  std::vector<double> radii;
  std::vector<double> flux_values;
  std::optional<double> converged_mass;  // empty when the ladder never settled
  std::string convergence_certificate;
  bool monotone = false;
  double worst_step = 0.0;
};

struct MassLadderOptions {
  // Starting radius; 0 picks twice the diameter bound of the excised
  // region united with the unit ball, so the first sphere already encloses
  // everything non-asymptotic.
  double r_start = 0.0;
  int max_steps = 18;
  double quad_abs_tol = 1e-10;
  double quad_rel_tol = 1e-10;
};

// Mass-normalized flux of the graph through the sphere |x| = r:
//   (1/c_n) * integral over |x|=r of (lap f <Df,nu> - nu^T D^2f Df)/(1+|Df|^2).
// Preconditions: the sphere must not touch any excised ball. Spheres are
// integrated with the product rule from quadrature.hpp; the per-angle node
// budget shrinks with dimension to keep the cost bounded.
double mass_flux(const GraphFunction& graph, double r, double abs_tol = 1e-10,
                 double rel_tol = 1e-10);

// Runs the flux ladder until three successive readings agree to
// max(1e-8, 1e-6 |value|), then extrapolates the tail. Non-convergence is
// reported, not thrown: converged_mass stays empty and the certificate
// explains what was observed.
FluxSeries adm_mass(const GraphFunction& graph,
                    const MassLadderOptions& options = {});

// Quasilocal mass of the level set {f = h}:
//   (1/c_n) * integral over {f=h} of (|Df|^2 / (1+|Df|^2)) H dA,
// with H the inward mean curvature of the level set in R^n. Rotational
// graphs use the closed form r^(n-2)/2 * u'^2/(1+u'^2) at r = r_of_h(h);
// general graphs (dimension 3 only) integrate over a grid via the mollified
// coarea formula. The level must be regular: sampled |Df| on it must stay
// above kRegularityFloor.
double quasilocal_mass(const GraphFunction& graph, double h);

// Both sides of the mass identity
//   c_n m = int_{f > h} R dx + integral over {f=h} of (|Df|^2/(1+|Df|^2)) H.
// The interior integral is improper; it is truncated at the flux ladder's
// final radius and the remainder bounded by a decay fit |R| <= C r^(-q)
// from samples past the truncation radius. A fit with q <= n cannot certify
// the tail; tail_certified then stays false and tail_bound is meaningless.
struct QuasiLocalReport {
  double h = 0.0;
  double interior_scalar_integral = 0.0;  // int R over {f > h}, truncated
  double quasilocal_term = 0.0;           // unnormalized boundary integral
  double identity_residual = 0.0;  // |c_n m - interior - quasilocal|
  double total_mass = 0.0;         // m from the flux ladder
  bool tail_certified = false;
  double tail_bound = 0.0;    // certified bound on the truncated remainder
  double fitted_decay = 0.0;  // q in |R| <= C r^(-q)
};

QuasiLocalReport lam_identity_residual(const GraphFunction& graph, double h);

// |boundary area| / (omega_{n-1} (2m)^((n-1)/(n-2))): at most 1 when the
// graph satisfies the horizon area bound for the given mass. Empty boundary
// gives 0; m <= 0 with a nonempty boundary gives +inf.
double penrose_ratio(const GraphFunction& graph, double mass);

// Least-squares fit |Df|^2 ~ constant * r^(-q) over [r_lo, r_hi], sampling
// the max of |Df|^2 over deterministic directions on each sphere. Records
// the observed decay of the gradient at infinity; callers report q, they do
// not gate on it.
struct GradientDecayFit {
  double q = 0.0;
  double constant = 0.0;
  double residual = 0.0;  // max |log sample - log fit|
};

GradientDecayFit fit_gradient_decay(const GraphFunction& graph, double r_lo,
                                    double r_hi);

}  // namespace gs
