#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "graphstab/graph_function.hpp"
#include "graphstab/levelsets.hpp"

namespace gs {

// Right side F(Y) of the comparison ODE
//   Y' = C_n (2/(3 sqrt 3)) [ (1/2)(Y/omega_{n-1})^((n-2)/(n-1)) - 1 ]^(3/2),
// the lower barrier satisfied by the rescaled volume function. F is
// nondecreasing and C^1 on its domain (bracket >= 0); below the domain the
// bracket is negative and the call throws.
double ode_rhs(double y, Dimension dim);

// Initial value 2 * 2^((n-1)/(n-2)) * omega_{n-1}: twice the rescaled
// threshold area, where the bracket equals 2^((n-2)/(n-1)) - 1 > 0.
double ode_initial_value(Dimension dim);

// Growth envelope certified on the computed range (dimensions 3 and 4):
// h <= coefficient * Y^(1/4) in dimension 3, h <= coefficient * log Y in
// dimension 4. The coefficient is the maximum of the corresponding ratio
// over samples with h >= h_lo (the last decade's start is excluded from
// nothing; early samples below h_lo only verify the envelope, they do not
// set the coefficient). `exponent` reports the fitted log-log slope of Y
// against h (dimension 3, limit 4) or the fitted rate d(log Y)/dh
// (dimension 4, limit 2/sqrt(6)).
struct GrowthFit {
  double coefficient = 0.0;
  double h_lo = 0.0;
  double h_hi = 0.0;
  double exponent = 0.0;
  bool certified = false;  // envelope holds at every sample of the run
};

// Solution record of the comparison ODE: accepted integration nodes, the
// blow-up height for dimensions >= 5 (with a conservative enclosure
// half-width), or the growth envelope for dimensions 3 and 4.
struct ComparisonSolution {
  Dimension dim;
  std::vector<double> h;
  std::vector<double> y;
  std::optional<double> blow_up_height;
  double blow_up_half_width = 0.0;
  std::optional<GrowthFit> growth;
};

// Integrates the ODE from Y(0) = ode_initial_value with an embedded
// Runge-Kutta pair. Dimensions >= 5: integration stops once Y exceeds
// 1e12 * omega_{n-1} and the remaining height to blow-up is added as the
// tail integral of dY/F(Y); throws ConvergenceError when the budget is
// exhausted first. Dimensions 3 and 4: integrates to h_budget and fits the
// growth envelope; throws ConvergenceError when the envelope cannot be
// certified on the range.
ComparisonSolution integrate_comparison(Dimension dim, double h_budget);

// Blow-up height by direct quadrature of h(infinity) = int dY/F(Y) from
// Y(0): the estimator independent of the forward integration (>= 5 only).
double blow_up_by_quadrature(Dimension dim);

// Y at an intermediate height by cubic Hermite interpolation between
// integration nodes (slopes are exact from the ODE). h must lie within the
// computed range.
double comparison_value(const ComparisonSolution& sol, double h);

// Sampled verdict of the comparison principle: if V is nondecreasing on
// [a,b] with V(a) >= Y(a) and V' >= F(V) at its regular samples, then
// Y(h-a) <= V(h) at every sample. Hypothesis failures are reported
// separately from conclusion failures; min_margin is the least V - Y over
// the samples in [a,b].
struct ComparisonVerdict {
  bool hypotheses_ok = false;
  bool conclusion_ok = false;
  double min_margin = 0.0;
  std::string detail;
};

ComparisonVerdict comparison_check(const VolumeFunction& vf,
                                   const ComparisonSolution& sol, double a,
                                   double b);

// The mass-1 normalization f~(x) = m^(-1/(n-2)) (f(m^(1/(n-2)) x) - h0).
GraphPtr rescale_graph(GraphPtr f, double mass, double h0);

// Height bound above h_0 in terms of the comparison solution's artifact
// constants: blow_up_height * m^(1/(n-2)) for dimensions >= 5 (no volume
// needed); coefficient * sqrt(m) * V^(1/4) in dimension 3 and
// coefficient * sqrt(m) * log(m^(-3/2) V) in dimension 4, where V = V(h)
// at the height being bounded (required; the integration range is extended
// until the envelope covers it).
double height_bound(Dimension dim, double mass,
                    std::optional<double> volume_at_h = std::nullopt);

// Asymptotic regime of a graph: |f(x) - (lambda + S_m(|x|))| <= gamma|x|^alpha
// for |x| > r0.
struct AsymptoticProfile {
  double r0 = 0.0;
  double gamma = 0.0;
  double decay_exponent = 0.0;
  double lambda = 0.0;
};

// The explicit constant C(gamma, alpha, a, b, c) making
//   gamma (c r)^alpha < S_m(b r) - S_m(a r)
// hold for r past the dimension's threshold (below). Dimension 3 needs
// alpha < 1/2, dimension 4 needs alpha < 0; both need 1 < a < b, c > 0.
double lemma_difference_constant(Dimension dim, double gamma, double alpha,
                                 double a, double b, double c);

// max(C * m^(-1/(1-2 alpha)), 2m) in dimension 3,
// max(C * m^(1/(2 alpha)), sqrt(2m)) in dimension 4: radii at or past this
// threshold satisfy the difference inequality above.
double r1_threshold(Dimension dim, double gamma, double alpha, double a,
                    double b, double c, double mass);

// The radius r_1, height h_1 = lambda + S_m(2 r_1) and margin epsilon with
//   f <= h_1 - epsilon on |x| = r_1 and f >= h_1 + epsilon on |x| = 3 r_1,
// so B_{r_1} is inside Omega_h inside B_{3 r_1} for h near h_1. Margins
// record the sampled slack of the two containments.
struct RoundLevelData {
  double r1 = 0.0;
  double h1 = 0.0;
  double epsilon = 0.0;
  double inner_margin = 0.0;  // min over |x| = r_1 of (h_1 - eps) - f
  double outer_margin = 0.0;  // min over |x| = 3 r_1 of f - (h_1 + eps)
};

RoundLevelData round_levelset_data(Dimension dim, const AsymptoticProfile& ap,
                                   double mass, const GraphFunction& f);

// Checks the Schwarzschild envelope f_filled(x) - h1 <= S_m(|x|) - S_m(r1)
// outside B_{r1}, given the sampled containment B_{r1} inside Omega_{h1}.
// Returns the minimum sampled slack of the envelope inequality and where
// it occurred.
struct EnvelopeVerdict {
  double min_slack = 0.0;
  double r_at_min = 0.0;
  int samples = 0;
};

EnvelopeVerdict envelope_check(const GraphFunction& f, double mass, double r1,
                               double h1);

// Height bound sup_{B_rho} (f_filled - h_0) <= bound for dimensions 3 and
// 4, assembled from the proof chain: the level h_1 with area at most
// omega (3 r_1)^(n-1), the growth envelope applied to that area, and the
// Schwarzschild envelope out to radius rho.
struct LowDimBound {
  double bound = 0.0;
  double interior = 0.0;  // bound on h_1 - h_0 via the growth envelope
  double exterior = 0.0;  // max(0, S_m(rho) - S_m(r_1))
  double r1 = 0.0;
  double h1 = 0.0;
  double area_bound = 0.0;  // omega (3 r_1)^(n-1)
};

LowDimBound lowdim_height_bound(Dimension dim, const AsymptoticProfile& ap,
                                double mass, double rho);

// CSV table (h, Y) of the integration nodes.
void write_comparison_csv(const ComparisonSolution& sol,
                          const std::filesystem::path& path);

// JSON header (n, blow_up_height, growth_fit) accompanying the CSV.
std::string comparison_json_header(const ComparisonSolution& sol);

}  // namespace gs
