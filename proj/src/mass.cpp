#include "graphstab/mass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graphstab/curvature.hpp"
#include "graphstab/errors.hpp"
#include "graphstab/gridcoarea.hpp"
#include "graphstab/io.hpp"
#include "graphstab/quadrature.hpp"
#include "graphstab/radial_profile.hpp"
#include "graphstab/sampling.hpp"

namespace gs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Angular node budget per dimension: the product rule has n-1 angular
// factors, so the affordable per-angle order drops as n grows.
int flux_max_order(int n) {
  if (n <= 4) return 64;
  if (n <= 6) return 32;
  return 16;
}

double boundary_reach(const GraphFunction& graph) {
  double reach = 0.0;
  for (const auto& ball : graph.boundary())
    reach = std::fmax(reach, norm(ball.center) + ball.radius);
  return reach;
}

void check_sphere_clear(const GraphFunction& graph, double r) {
  if (!(r > 0.0))
    throw PreconditionError("flux sphere radius must be positive");
  for (const auto& ball : graph.boundary()) {
    if (std::fabs(norm(ball.center) - r) <= ball.radius * (1.0 + 1e-12))
      throw PreconditionError("flux sphere intersects the excised region");
  }
}

// <P, nu>/Q with P_j = sum_i (f_ii f_j - f_ij f_i): the divergence-form
// field whose flux through large spheres converges to c_n * mass.
double flux_density(const Jet& jet, const VecN& xhat) {
  double lap = trace(jet.hess);
  double q = 1.0 + norm2(jet.grad);
  VecN hg = matvec(jet.hess, jet.grad);
  return (lap * dot(jet.grad, xhat) - dot(xhat, hg)) / q;
}

// Scalar curvature of a rotational graph from its profile:
//   R(r) = (n-1) [ (n-2) w / r^2 + w' / r ],  w = u'^2/(1+u'^2).
// This is the radial reduction of the divergence-form identity; tests
// cross-check it against the jet-based curvature routes.
double radial_scalar_curvature(const RadialProfile& profile, int n, double r) {
  double p = profile.du(r);
  double dp = profile.d2u(r);
  double w, dw;
  if (std::isinf(p)) {
    w = 1.0;
    dw = 0.0;
  } else {
    double q = 1.0 + p * p;
    w = p * p / q;
    dw = 2.0 * p * dp / (q * q);
  }
  return (n - 1) * ((n - 2) * w / (r * r) + dw / r);
}

// Integral of fn over [a, b] split into doubling panels so adaptive Simpson
// sees each decade of a decaying integrand at its own scale.
double integrate_doubling(const std::function<double(double)>& fn, double a,
                          double b, double abs_tol, double rel_tol) {
  KahanSum total;
  double lo = a;
  while (lo < b) {
    double hi = std::fmin(2.0 * lo, b);
    total.add(adaptive_simpson(fn, lo, hi, abs_tol, rel_tol));
    lo = hi;
  }
  return total.value();
}

// Largest |R| seen over deterministic directions on the sphere |x| = r.
double sup_scalar_curvature(const GraphFunction& graph, double r) {
  double sup = 0.0;
  for (uint64_t i = 0; i < 64; ++i) {
    VecN x = r * halton_direction(graph.dim().n(), i);
    sup = std::fmax(sup, std::fabs(scalar_curvature_reilly(graph, x)));
  }
  return sup;
}

struct TailFit {
  bool certified = false;
  double q = 0.0;      // fitted decay exponent of |R|
  double bound = 0.0;  // bound on |int R| over r > r_trunc when certified
};

// Bounds the truncated remainder of int R dx by fitting |R| <= C r^(-q)
// from sup samples at r_trunc * {1, 2, 4, 8}. Integrable against the
// r^(n-1) volume weight only when q > n; otherwise the fit is reported
// uncertified. A graph whose curvature has already hit exact zero (all
// samples negligible) certifies trivially.
TailFit fit_scalar_tail(const GraphFunction& graph,
                        const RadialProfile* profile, double r_trunc,
                        double scale) {
  const int n = graph.dim().n();
  std::array<double, 4> radius{};
  std::array<double, 4> sample{};
  for (int k = 0; k < 4; ++k) {
    radius[static_cast<size_t>(k)] = r_trunc * static_cast<double>(1 << k);
    double r = radius[static_cast<size_t>(k)];
    sample[static_cast<size_t>(k)] =
        profile ? std::fabs(radial_scalar_curvature(*profile, n, r))
                : sup_scalar_curvature(graph, r);
  }

  double floor = 1e-18 * (1.0 + std::fabs(scale));
  bool all_zero = true;
  for (double s : sample) all_zero = all_zero && s <= floor;
  if (all_zero) return {true, kInf, 0.0};

  double q = kInf;
  for (int k = 0; k < 3; ++k) {
    double a = sample[static_cast<size_t>(k)];
    double b = sample[static_cast<size_t>(k + 1)];
    if (a <= floor || b <= floor) continue;
    q = std::fmin(q, std::log2(a / b));
  }
  if (!(q > static_cast<double>(n)) || std::isinf(q)) return {false, q, 0.0};

  double c = 0.0;
  for (int k = 0; k < 4; ++k)
    c = std::fmax(c, sample[static_cast<size_t>(k)] *
                         std::pow(radius[static_cast<size_t>(k)], q));
  double omega = Constants::at(graph.dim()).omega;
  double bound = c * omega * std::pow(r_trunc, n - q) / (q - n);
  return {true, q, bound};
}

// Rejects levels the coarse scan classifies as absent or critical.
void check_level_regular(const GraphFunction& graph, const GridBox& box,
                         double h) {
  LevelScan scan = scan_level(graph, box, h);
  if (!scan.found)
    throw PreconditionError("level " + format_double(h) +
                            " was not found in the sampling box");
  if (scan.min_gradient < kRegularityFloor)
    throw PreconditionError("level " + format_double(h) +
                            " is not regular: |Df| falls below " +
                            format_double(kRegularityFloor) +
                            " on the level set");
}

double quasilocal_closed_form(const RadialProfile& profile, int n, double r) {
  double p = profile.du(r);
  double w = std::isinf(p) ? 1.0 : p * p / (1.0 + p * p);
  return 0.5 * std::pow(r, n - 2) * w;
}

}  // namespace

double mass_flux(const GraphFunction& graph, double r, double abs_tol,
                 double rel_tol) {
  check_sphere_clear(graph, r);
  const auto constants = Constants::at(graph.dim());
  auto result = integrate_sphere(
      graph.dim(), r,
      [&](const VecN& x) { return flux_density(graph.jet(x), (1.0 / r) * x); },
      abs_tol, rel_tol, flux_max_order(graph.dim().n()));
  return result.value / constants.c_n;
}

FluxSeries adm_mass(const GraphFunction& graph,
                    const MassLadderOptions& options) {
  double r0 = options.r_start;
  if (r0 <= 0.0) r0 = 4.0 * std::fmax(boundary_reach(graph), 1.0);

  FluxSeries series;
  for (int k = 0; k < options.max_steps; ++k) {
    double r = r0 * std::pow(2.0, k);
    series.radii.push_back(r);
    series.flux_values.push_back(
        mass_flux(graph, r, options.quad_abs_tol, options.quad_rel_tol));

    size_t m = series.flux_values.size();
    if (m < 3) continue;
    double v1 = series.flux_values[m - 3];
    double v2 = series.flux_values[m - 2];
    double v3 = series.flux_values[m - 1];
    double tol = std::fmax(1e-8, 1e-6 * std::fabs(v3));
    if (std::fabs(v3 - v2) <= tol && std::fabs(v2 - v1) <= tol) {
      PowerFit fit = power_extrapolate(v1, v2, v3);
      double mass = (std::isfinite(fit.rate) && fit.rate > 0.0) ? fit.limit
                                                                : v3;
      series.converged_mass = mass;
      series.convergence_certificate =
          "three successive flux readings at r = " + format_double(r) +
          " agree to " + format_double(tol) + "; extrapolated mass " +
          format_double(mass) + " (fitted decay rate " +
          format_double(fit.rate) + ")";
      break;
    }
  }

  if (!series.converged_mass && series.flux_values.size() >= 2) {
    size_t m = series.flux_values.size();
    double last_delta =
        std::fabs(series.flux_values[m - 1] - series.flux_values[m - 2]);
    series.convergence_certificate =
        "flux readings did not settle within " +
        std::to_string(series.radii.size()) + " rungs; last increment " +
        format_double(last_delta) + " exceeds the agreement tolerance";
  }

  double worst = 0.0;
  double scale = 0.0;
  for (double v : series.flux_values) scale = std::fmax(scale, std::fabs(v));
  for (size_t k = 1; k < series.flux_values.size(); ++k)
    worst = std::fmin(worst,
                      series.flux_values[k] - series.flux_values[k - 1]);
  series.worst_step = worst;
  series.monotone =
      worst >= -10.0 * (options.quad_abs_tol + options.quad_rel_tol * scale);
  return series;
}

double quasilocal_mass(const GraphFunction& graph, double h) {
  const auto constants = Constants::at(graph.dim());
  const int n = graph.dim().n();

  const RadialProfile* profile = graph.radial();
  if (profile && profile->nondecreasing()) {
    double r = profile->r_of_h(h);
    double p = profile->du(r);
    if (!std::isinf(p) && std::fabs(p) < kRegularityFloor)
      throw PreconditionError("level " + format_double(h) +
                              " is not regular: |u'| = " + format_double(p) +
                              " at r = " + format_double(r));
    return quasilocal_closed_form(*profile, n, r);
  }

  if (n != 3)
    throw PreconditionError(
        "quasilocal mass for non-rotational graphs is grid-based and "
        "implemented for dimension 3 only");

  GridBox box = level_box(graph, h);
  check_level_regular(graph, box, h);
  double boundary_term = grid_level_integral(
      graph, box, h, [](const VecN&, const Jet& jet) {
        double q = 1.0 + norm2(jet.grad);
        return (norm2(jet.grad) / q) * levelset_mean_curvature(jet);
      });
  return boundary_term / constants.c_n;
}

QuasiLocalReport lam_identity_residual(const GraphFunction& graph, double h) {
  const auto constants = Constants::at(graph.dim());
  const int n = graph.dim().n();

  FluxSeries series = adm_mass(graph);
  if (!series.converged_mass)
    throw ConvergenceError(
        "flux ladder did not converge, so the identity has no mass to "
        "compare against: " +
        series.convergence_certificate);
  double mass = *series.converged_mass;
  double r_trunc = series.radii.back();
  double cn_m = constants.c_n * mass;

  QuasiLocalReport report;
  report.h = h;
  report.total_mass = mass;
  report.quasilocal_term = constants.c_n * quasilocal_mass(graph, h);

  const RadialProfile* profile = graph.radial();
  if (profile && profile->nondecreasing()) {
    double r_h = profile->r_of_h(h);
    auto integrand = [&](double r) {
      return radial_scalar_curvature(*profile, n, r) * constants.omega *
             std::pow(r, n - 1);
    };
    report.interior_scalar_integral = integrate_doubling(
        integrand, r_h, r_trunc, 1e-13 * (1.0 + std::fabs(cn_m)), 1e-10);
  } else {
    // Dimension-3 grid over the level-set box, then sphere shells out to
    // the truncation radius. The box weight keeps only points inside the
    // inscribed sphere so the two pieces tile the region exactly.
    GridBox box = level_box(graph, h);
    double r_box = box.half_width;
    auto region_pass = [&](int cells) {
      GridBox pass = box;
      pass.cells = cells;
      return grid_region_integral(
          graph, pass, [&](const VecN& x, double value) {
            if (value <= h || norm2(x) >= r_box * r_box) return 0.0;
            if (!graph.in_domain(x)) return 0.0;
            return scalar_curvature_reilly(graph, x);
          });
    };
    double coarse = region_pass(box.cells / 4);
    double mid = region_pass(box.cells / 2);
    double fine = region_pass(box.cells);
    PowerFit fit = power_extrapolate(coarse, mid, fine);
    double grid_part =
        (std::isfinite(fit.rate) && fit.rate > 0.5) ? fit.limit : fine;

    auto shell = [&](double r) {
      return integrate_sphere(
                 graph.dim(), r,
                 [&](const VecN& x) {
                   return scalar_curvature_reilly(graph, x);
                 },
                 1e-11, 1e-9, 64, 32)
          .value;
    };
    double annulus = integrate_doubling(
        shell, r_box, r_trunc, 1e-11 * (1.0 + std::fabs(cn_m)), 1e-8);
    report.interior_scalar_integral = grid_part + annulus;
  }

  TailFit tail = fit_scalar_tail(graph, profile, r_trunc, cn_m);
  report.tail_certified = tail.certified;
  report.tail_bound = tail.bound;
  report.fitted_decay = tail.q;
  report.identity_residual = std::fabs(cn_m - report.interior_scalar_integral -
                                       report.quasilocal_term);
  return report;
}

double penrose_ratio(const GraphFunction& graph, double mass) {
  const auto constants = Constants::at(graph.dim());
  const int n = graph.dim().n();
  if (graph.boundary().empty()) return 0.0;
  if (!(mass > 0.0)) return kInf;
  double area = 0.0;
  for (const auto& ball : graph.boundary())
    area += constants.omega * std::pow(ball.radius, n - 1);
  double bound =
      constants.omega * std::pow(2.0 * mass, static_cast<double>(n - 1) /
                                                 static_cast<double>(n - 2));
  return area / bound;
}

GradientDecayFit fit_gradient_decay(const GraphFunction& graph, double r_lo,
                                    double r_hi) {
  if (!(r_lo > boundary_reach(graph)) || !(r_hi > r_lo))
    throw PreconditionError(
        "gradient decay fit needs boundary reach < r_lo < r_hi");
  const int n = graph.dim().n();
  const int count = 6;
  std::array<double, count> logr{};
  std::array<double, count> logs{};
  for (int k = 0; k < count; ++k) {
    double r = r_lo * std::pow(r_hi / r_lo,
                               static_cast<double>(k) / (count - 1));
    double sup = 0.0;
    for (uint64_t i = 0; i < 48; ++i) {
      VecN x = r * halton_direction(n, i);
      sup = std::fmax(sup, norm2(graph.jet(x).grad));
    }
    if (sup <= 0.0) return {kInf, 0.0, 0.0};
    logr[static_cast<size_t>(k)] = std::log(r);
    logs[static_cast<size_t>(k)] = std::log(sup);
  }

  double mr = 0.0, ms = 0.0;
  for (int k = 0; k < count; ++k) {
    mr += logr[static_cast<size_t>(k)];
    ms += logs[static_cast<size_t>(k)];
  }
  mr /= count;
  ms /= count;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < count; ++k) {
    double dr = logr[static_cast<size_t>(k)] - mr;
    num += dr * (logs[static_cast<size_t>(k)] - ms);
    den += dr * dr;
  }
  double slope = num / den;

  GradientDecayFit fit;
  fit.q = -slope;
  fit.constant = std::exp(ms - slope * mr);
  for (int k = 0; k < count; ++k) {
    double predicted = ms + slope * (logr[static_cast<size_t>(k)] - mr);
    fit.residual = std::fmax(
        fit.residual, std::fabs(logs[static_cast<size_t>(k)] - predicted));
  }
  return fit;
}

}  // namespace gs
