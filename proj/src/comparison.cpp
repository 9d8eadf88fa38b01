#include "graphstab/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "graphstab/errors.hpp"
#include "graphstab/io.hpp"
#include "graphstab/quadrature.hpp"
#include "graphstab/sampling.hpp"
#include "graphstab/schwarzschild.hpp"

#include "json.hpp"

namespace gs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integration stops once Y exceeds this multiple of omega; past it the
// right side is within a few parts in 1e9 of its power-law envelope and the
// remaining height is a closed-form tail plus a tiny certified correction.
constexpr double kCapFactor = 1e12;

// Relative tolerance of the embedded Runge-Kutta pair.
constexpr double kStepRtol = 1e-10;

// Everything the right side needs, precomputed per dimension. For large Y,
// F(Y) approaches k_inf * Y^q from below.
struct OdeCoeffs {
  int n = 0;
  double omega = 0.0;
  double front = 0.0;  // c_n * 2 / (3 sqrt 3)
  double p = 0.0;      // (n-2)/(n-1)
  double q = 0.0;      // 3p/2, the power of the large-Y envelope
  double k_inf = 0.0;  // front * 2^(-3/2) * omega^(-q)
  double y0 = 0.0;     // initial value
  double cap = 0.0;    // kCapFactor * omega
};

OdeCoeffs ode_coeffs(Dimension dim) {
  const Constants c = Constants::at(dim);
  OdeCoeffs k;
  k.n = dim.n();
  k.omega = c.omega;
  k.front = c.c_n * 2.0 / (3.0 * std::sqrt(3.0));
  k.p = static_cast<double>(k.n - 2) / static_cast<double>(k.n - 1);
  k.q = 1.5 * k.p;
  k.k_inf = k.front * std::pow(0.5, 1.5) * std::pow(c.omega, -k.q);
  k.y0 = 2.0 *
         std::pow(2.0, static_cast<double>(k.n - 1) /
                           static_cast<double>(k.n - 2)) *
         c.omega;
  k.cap = kCapFactor * c.omega;
  return k;
}

double bracket_of(const OdeCoeffs& k, double y) {
  return 0.5 * std::pow(y / k.omega, k.p) - 1.0;
}

// Domain floor: the Y with vanishing bracket.
double domain_floor(const OdeCoeffs& k) {
  return k.omega * std::pow(2.0, 1.0 / k.p);
}

double rhs_of(const OdeCoeffs& k, double y) {
  const double b = bracket_of(k, y);
  if (b < 0.0) {
    throw PreconditionError(
        "comparison right side undefined: Y = " + format_double(y) +
        " is below the domain floor " + format_double(domain_floor(k)) +
        " in dimension " + std::to_string(k.n));
  }
  return k.front * b * std::sqrt(b);
}

// Stage evaluation that reports a domain violation as NaN so the stepper
// can reject the step instead of aborting.
double rhs_stage(const OdeCoeffs& k, double y) {
  const double b = bracket_of(k, y);
  if (!(b >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return k.front * b * std::sqrt(b);
}

// One Dormand-Prince 5(4) step from (h, y) with slope k1 = F(y) already
// known. On success fills y5 (5th order), err (embedded difference) and
// k7 = F(y5) for first-same-as-last reuse.
struct StepResult {
  double y5 = 0.0;
  double err = 0.0;
  double k7 = 0.0;
  bool ok = false;
};

StepResult dp_step(const OdeCoeffs& k, double y, double dt, double k1) {
  StepResult out;
  const double k2 = rhs_stage(k, y + dt * (0.2 * k1));
  const double k3 = rhs_stage(k, y + dt * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
  const double k4 = rhs_stage(
      k, y + dt * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
  const double k5 =
      rhs_stage(k, y + dt * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                             64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
  const double k6 =
      rhs_stage(k, y + dt * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                             46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                             5103.0 / 18656.0 * k5));
  const double y5 =
      y + dt * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
  const double k7 = rhs_stage(k, y5);
  const double y4 =
      y + dt * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
  if (!std::isfinite(y5) || !std::isfinite(y4) || !std::isfinite(k7)) {
    return out;
  }
  out.y5 = y5;
  out.err = std::fabs(y5 - y4);
  out.k7 = k7;
  out.ok = true;
  return out;
}

// Remaining height from ys to blow-up: the closed-form tail of the power
// envelope P(Y) = k_inf Y^q plus the quadrature of 1/F - 1/P, whose own
// tail beyond the upper cutoff is bounded explicitly. Requires q > 1
// (dimensions >= 5) and ys at or past the integration cap.
struct TailResult {
  double value = 0.0;
  double remainder_bound = 0.0;
};

TailResult tail_height(const OdeCoeffs& k, double ys) {
  TailResult out;
  const double main = std::pow(ys, 1.0 - k.q) / (k.k_inf * (k.q - 1.0));

  // 1/F - 1/P = expm1(-1.5 log1p(-eps)) / P with eps = 2 (omega/Y)^p,
  // evaluated without cancellation. For eps <= 1e-5 the numerator is at
  // most 1.6 eps, which bounds the cutoff remainder in closed form.
  const auto correction = [&](double y) {
    const double eps = 2.0 * std::pow(k.omega / y, k.p);
    return std::expm1(-1.5 * std::log1p(-eps)) / (k.k_inf * std::pow(y, k.q));
  };
  // Cutoff where the remainder bound drops below 1e-16 of the main term:
  // integral of 1.6 * 2 omega^p Y^(-p) / P from yt is explicit.
  const double decay = k.p + k.q - 1.0;
  const double bound_front = 3.2 * std::pow(k.omega, k.p) / (k.k_inf * decay);
  double yt = ys;
  while (bound_front * std::pow(yt, -decay) > 1e-16 * main && yt < 1e200) {
    yt *= 4.0;
  }
  // Integrate in t = log(Y/ys) so the exponential spread costs nothing.
  const double span = std::log(yt / ys);
  const double corr = adaptive_simpson(
      [&](double t) {
        const double y = ys * std::exp(t);
        return y * correction(y);
      },
      0.0, span, 1e-18 * main, 1e-12);
  out.remainder_bound = bound_front * std::pow(yt, -decay) + 1e-17 * main;
  out.value = main + corr;
  return out;
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

// h / Y^(1/4) in dimension 3, h / log Y in dimension 4.
double growth_base(int n, double y) {
  return n == 3 ? std::pow(y, 0.25) : std::log(y);
}

GrowthFit fit_growth(const OdeCoeffs& k, const std::vector<double>& h,
                     const std::vector<double>& y) {
  GrowthFit fit;
  fit.h_hi = h.back();
  // Coefficient window: everything past the first decade of heights. The
  // ratio h / base(Y) starts near zero, peaks in the interior and decays
  // toward its limit, so the window captures the global maximum once the
  // budget clears the peak.
  fit.h_lo = 10.0 * h[1];
  if (!(fit.h_hi > fit.h_lo)) {
    throw ConvergenceError("height budget " + format_double(fit.h_hi) +
                           " spans less than a decade beyond the first "
                           "step " +
                           format_double(h[1]));
  }

  for (size_t i = 1; i < h.size(); ++i) {
    if (h[i] < fit.h_lo) continue;
    fit.coefficient =
        std::fmax(fit.coefficient, h[i] / growth_base(k.n, y[i]));
  }
  // The envelope certifies only if no first-decade node pokes above it.
  fit.certified = true;
  for (size_t i = 1; i < h.size() && h[i] < fit.h_lo; ++i) {
    if (h[i] / growth_base(k.n, y[i]) > fit.coefficient * (1.0 + 1e-12)) {
      fit.certified = false;
      break;
    }
  }
  if (!fit.certified) {
    throw ConvergenceError(
        "growth envelope not certified: a first-decade node exceeds the "
        "coefficient " +
        format_double(fit.coefficient));
  }

  // Exponent over the final decade, where the asymptotic law has set in.
  std::vector<double> xs, ys;
  for (size_t i = 0; i < h.size(); ++i) {
    if (h[i] < fit.h_hi / 10.0) continue;
    xs.push_back(k.n == 3 ? std::log(h[i]) : h[i]);
    ys.push_back(std::log(y[i]));
  }
  if (xs.size() < 8) {
    throw ConvergenceError(
        "growth fit needs at least 8 nodes in the final decade; got " +
        std::to_string(xs.size()));
  }
  fit.exponent = fit_slope(xs, ys);
  return fit;
}

SchwarzschildProfile envelope_profile(Dimension dim, double mass) {
  if (!(mass > 0.0)) {
    throw PreconditionError("mass must be positive, got " +
                            format_double(mass));
  }
  return SchwarzschildProfile(dim, mass);
}

void check_low_dimension(Dimension dim) {
  if (dim.n() > 4) {
    throw PreconditionError(
        "the level-set localization constants are defined for dimensions 3 "
        "and 4; dimension " +
        std::to_string(dim.n()) + " uses the direct height bound");
  }
}

double lemma_power(Dimension dim, double alpha) {
  return dim.n() == 3 ? -1.0 / (1.0 - 2.0 * alpha) : 1.0 / (2.0 * alpha);
}

void check_lemma_exponent(Dimension dim, double alpha) {
  if (dim.n() == 3) {
    if (!(alpha < 0.5)) {
      throw PreconditionError("dimension 3 needs decay exponent below 1/2, "
                              "got " +
                              format_double(alpha));
    }
  } else if (!(alpha < 0.0)) {
    throw PreconditionError("dimension 4 needs a negative decay exponent, "
                            "got " +
                            format_double(alpha));
  }
}

// Shared radius floor of the localization lemmas: both the threshold from
// the difference constant and the horizon sphere of the mass.
double localization_radius(Dimension dim, const AsymptoticProfile& ap,
                           double mass) {
  const double c_star =
      std::fmax(lemma_difference_constant(dim, ap.gamma, ap.decay_exponent,
                                          1.0, 2.0, 1.0),
                lemma_difference_constant(dim, ap.gamma, ap.decay_exponent,
                                          2.0, 3.0, 3.0));
  const double pow_m = lemma_power(dim, ap.decay_exponent);
  double r1 = c_star * std::pow(mass, pow_m);
  r1 = std::fmax(r1, schwarzschild_horizon_radius(dim, mass));
  r1 = std::fmax(r1, ap.r0);
  return r1;
}

}  // namespace

double ode_rhs(double y, Dimension dim) {
  return rhs_of(ode_coeffs(dim), y);
}

double ode_initial_value(Dimension dim) { return ode_coeffs(dim).y0; }

ComparisonSolution integrate_comparison(Dimension dim, double h_budget) {
  if (!(h_budget > 0.0)) {
    throw PreconditionError("height budget must be positive, got " +
                            format_double(h_budget));
  }
  const OdeCoeffs k = ode_coeffs(dim);
  const bool finite_blowup = k.n >= 5;

  ComparisonSolution sol{dim, {}, {}, std::nullopt, 0.0, std::nullopt};
  double h = 0.0;
  double y = k.y0;
  double slope = rhs_of(k, y);
  sol.h.push_back(h);
  sol.y.push_back(y);

  double dt = 0.01 * y / slope;
  long steps = 0;
  while (true) {
    if (finite_blowup && y >= k.cap) break;
    if (!finite_blowup && h >= h_budget * (1.0 - 1e-14)) break;
    if (h >= h_budget) {
      throw ConvergenceError("comparison solution did not blow up within "
                             "the height budget " +
                             format_double(h_budget));
    }
    if (++steps > 2000000) {
      throw ConvergenceError("comparison integration exceeded its step "
                             "budget");
    }
    if (y > 1e280) {
      throw ConvergenceError("comparison solution exceeded the floating "
                             "range before the height budget");
    }
    if (!finite_blowup) dt = std::fmin(dt, h_budget - h);

    const StepResult step = dp_step(k, y, dt, slope);
    const double scale = kStepRtol * std::fmax(std::fabs(y),
                                               step.ok ? step.y5 : y);
    if (!step.ok || step.err > scale) {
      const double shrink =
          step.ok ? std::fmax(0.2, 0.9 * std::pow(scale / step.err, 0.2))
                  : 0.2;
      dt *= shrink;
      continue;
    }
    h += dt;
    y = step.y5;
    slope = step.k7;
    sol.h.push_back(h);
    sol.y.push_back(y);
    const double grow =
        step.err > 0.0
            ? std::fmin(5.0, 0.9 * std::pow(scale / step.err, 0.2))
            : 5.0;
    dt *= std::fmax(0.2, grow);
  }

  if (finite_blowup) {
    const TailResult tail = tail_height(k, y);
    sol.blow_up_height = h + tail.value;
    // Enclosure: the tail's certified remainder, its quadrature tolerance
    // and an allowance for the stepper's accumulated relative drift.
    sol.blow_up_half_width =
        tail.remainder_bound + 1e-8 * *sol.blow_up_height;
  } else {
    sol.growth = fit_growth(k, sol.h, sol.y);
  }
  return sol;
}

double blow_up_by_quadrature(Dimension dim) {
  const OdeCoeffs k = ode_coeffs(dim);
  if (k.n < 5) {
    throw PreconditionError("the comparison solution blows up at finite "
                            "height only in dimensions 5 and above; got " +
                            std::to_string(k.n));
  }
  // Finite part in t = log(Y/y0); the integrand Y/F is smooth and bounded.
  const double span = std::log(k.cap / k.y0);
  const double finite = adaptive_simpson(
      [&](double t) {
        const double y = k.y0 * std::exp(t);
        return y / rhs_of(k, y);
      },
      0.0, span, 1e-14, 1e-12);
  return finite + tail_height(k, k.cap).value;
}

double comparison_value(const ComparisonSolution& sol, double h) {
  if (sol.h.size() < 2) {
    throw PreconditionError("comparison solution holds fewer than two "
                            "nodes");
  }
  const double lo = sol.h.front();
  const double hi = sol.h.back();
  const double slack = 1e-12 * (1.0 + std::fabs(hi));
  if (h < lo - slack || h > hi + slack) {
    throw PreconditionError("height " + format_double(h) +
                            " is outside the computed range [" +
                            format_double(lo) + ", " + format_double(hi) +
                            "]");
  }
  const double hc = std::clamp(h, lo, hi);
  size_t i =
      static_cast<size_t>(std::upper_bound(sol.h.begin(), sol.h.end(), hc) -
                          sol.h.begin());
  i = std::clamp<size_t>(i, 1, sol.h.size() - 1) - 1;

  const OdeCoeffs k = ode_coeffs(sol.dim);
  const double dh = sol.h[i + 1] - sol.h[i];
  const double t = (hc - sol.h[i]) / dh;
  const double m0 = rhs_of(k, sol.y[i]);
  const double m1 = rhs_of(k, sol.y[i + 1]);
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * sol.y[i] +
         (t3 - 2.0 * t2 + t) * dh * m0 +
         (-2.0 * t3 + 3.0 * t2) * sol.y[i + 1] + (t3 - t2) * dh * m1;
}

ComparisonVerdict comparison_check(const VolumeFunction& vf,
                                   const ComparisonSolution& sol, double a,
                                   double b) {
  if (!(a < b)) {
    throw PreconditionError("comparison interval needs a < b");
  }
  ComparisonVerdict verdict;
  verdict.min_margin = kInf;

  std::vector<const LevelSample*> picked;
  for (const LevelSample& s : vf.samples) {
    if (s.h >= a && s.h <= b) picked.push_back(&s);
  }
  if (picked.empty()) {
    verdict.detail = "no volume samples in [" + format_double(a) + ", " +
                     format_double(b) + "]";
    verdict.min_margin = 0.0;
    return verdict;
  }

  const OdeCoeffs k = ode_coeffs(sol.dim);
  verdict.hypotheses_ok = true;

  // Hypothesis 1: V nondecreasing across the picked samples.
  for (size_t i = 0; i + 1 < picked.size(); ++i) {
    const double tol = 1e-9 * (1.0 + std::fabs(picked[i]->volume));
    if (picked[i + 1]->volume < picked[i]->volume - tol) {
      verdict.hypotheses_ok = false;
      verdict.detail = "volume decreases at h = " +
                       format_double(picked[i + 1]->h);
      break;
    }
  }

  // Hypothesis 2: the first sample starts at or above the barrier.
  if (verdict.hypotheses_ok) {
    const LevelSample& first = *picked.front();
    const double y_first = comparison_value(sol, first.h - a);
    const double tol = 1e-9 * (1.0 + std::fabs(first.volume));
    if (first.volume + tol < y_first) {
      verdict.hypotheses_ok = false;
      verdict.detail = "initial volume " + format_double(first.volume) +
                       " at h = " + format_double(first.h) +
                       " is below the comparison start " +
                       format_double(y_first);
    }
  }

  // Hypothesis 3: the slope inequality V' >= F(V) at regular samples.
  int slope_checks = 0;
  if (verdict.hypotheses_ok) {
    for (const LevelSample* s : picked) {
      if (!s->regular) continue;
      const double tol = 1e-9 * (1.0 + std::fabs(s->volume));
      if (bracket_of(k, s->volume) < 0.0) {
        verdict.hypotheses_ok = false;
        verdict.detail = "volume " + format_double(s->volume) + " at h = " +
                         format_double(s->h) +
                         " is below the comparison domain";
        break;
      }
      const double need = rhs_of(k, s->volume);
      if (s->v_prime < need - tol) {
        verdict.hypotheses_ok = false;
        verdict.detail = "slope deficit " + format_double(need - s->v_prime) +
                         " at h = " + format_double(s->h);
        break;
      }
      ++slope_checks;
    }
  }

  // Conclusion: Y(h - a) <= V(h) at every sample the solution covers.
  verdict.conclusion_ok = true;
  int compared = 0;
  for (const LevelSample* s : picked) {
    const double shifted = s->h - a;
    if (sol.blow_up_height &&
        shifted > *sol.blow_up_height + sol.blow_up_half_width) {
      verdict.conclusion_ok = false;
      verdict.detail = "finite volume at h = " + format_double(s->h) +
                       " past the blow-up height " +
                       format_double(*sol.blow_up_height);
      break;
    }
    if (shifted > sol.h.back()) continue;
    const double margin = s->volume - comparison_value(sol, shifted);
    verdict.min_margin = std::fmin(verdict.min_margin, margin);
    ++compared;
    if (margin < -1e-9 * (1.0 + std::fabs(s->volume))) {
      verdict.conclusion_ok = false;
      verdict.detail = "comparison value exceeds the volume by " +
                       format_double(-margin) + " at h = " +
                       format_double(s->h);
      break;
    }
  }
  if (compared == 0) verdict.min_margin = 0.0;
  if (verdict.hypotheses_ok && verdict.conclusion_ok && verdict.detail.empty())
    verdict.detail = "ok: compared " + std::to_string(compared) +
                     " samples, " + std::to_string(slope_checks) +
                     " slope checks";
  return verdict;
}

namespace {

// General-graph rescaling f~(x) = (f(lambda x) - shift)/lambda: gradients
// are invariant, curvatures scale by lambda.
class RescaledGraph : public GraphFunction {
 public:
  RescaledGraph(GraphPtr base, double lambda, double shift,
                std::vector<BoundaryBall> boundary)
      : GraphFunction(base->dim(), base->kind(), std::move(boundary)),
        base_(std::move(base)),
        lambda_(lambda),
        shift_(shift) {}

  double sup_height() const override {
    const double s = base_->sup_height();
    if (!std::isfinite(s)) return s;
    return (s - shift_) / lambda_;
  }

 protected:
  Jet jet_impl(const VecN& x) const override {
    const Jet j = base_->jet(lambda_ * x);
    Jet out;
    out.f = (j.f - shift_) / lambda_;
    out.grad = j.grad;
    out.hess = j.hess;
    const int n = dim().n();
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) out.hess.at(r, c) *= lambda_;
    out.grad_laplacian = (lambda_ * lambda_) * j.grad_laplacian;
    out.has_third = j.has_third;
    return out;
  }

 private:
  GraphPtr base_;
  double lambda_;
  double shift_;
};

}  // namespace

GraphPtr rescale_graph(GraphPtr f, double mass, double h0) {
  if (!f) throw PreconditionError("rescale_graph needs a graph");
  if (!(mass > 0.0)) {
    throw PreconditionError("mass must be positive, got " +
                            format_double(mass));
  }
  const int n = f->dim().n();
  const double lambda =
      std::pow(mass, 1.0 / static_cast<double>(n - 2));
  if (const RadialProfile* profile = f->radial()) {
    RadialPtr base(f, profile);
    return make_rotational_graph(
        f->dim(), std::make_shared<ScaledRadial>(base, lambda, h0));
  }
  std::vector<BoundaryBall> boundary;
  boundary.reserve(f->boundary().size());
  for (const BoundaryBall& ball : f->boundary()) {
    BoundaryBall scaled;
    scaled.center = (1.0 / lambda) * ball.center;
    scaled.radius = ball.radius / lambda;
    scaled.plateau = (ball.plateau - h0) / lambda;
    boundary.push_back(scaled);
  }
  return std::make_shared<RescaledGraph>(std::move(f), lambda, h0,
                                         std::move(boundary));
}

double height_bound(Dimension dim, double mass,
                    std::optional<double> volume_at_h) {
  if (!(mass > 0.0)) {
    throw PreconditionError("mass must be positive, got " +
                            format_double(mass));
  }
  const OdeCoeffs k = ode_coeffs(dim);
  const double lambda =
      std::pow(mass, 1.0 / static_cast<double>(k.n - 2));

  if (k.n >= 5) {
    double budget = 16.0;
    for (int tries = 0; tries < 8; ++tries) {
      try {
        const ComparisonSolution sol = integrate_comparison(dim, budget);
        return (*sol.blow_up_height + sol.blow_up_half_width) * lambda;
      } catch (const ConvergenceError&) {
        budget *= 2.0;
      }
    }
    throw ConvergenceError("blow-up height not reached within the doubled "
                           "budgets");
  }

  if (!volume_at_h) {
    throw PreconditionError(
        "dimensions 3 and 4 have no uniform height bound; pass the level "
        "area the bound should cover");
  }
  const double scaled =
      *volume_at_h /
      std::pow(mass, static_cast<double>(k.n - 1) /
                         static_cast<double>(k.n - 2));
  const double y_eff = std::fmax(scaled, k.y0);
  const double target = std::fmax(scaled, 10.0 * k.y0);

  double budget = 32.0;
  for (int tries = 0; tries < 24; ++tries) {
    const ComparisonSolution sol = integrate_comparison(dim, budget);
    if (sol.y.back() >= target) {
      return lambda * sol.growth->coefficient * growth_base(k.n, y_eff);
    }
    budget *= 2.0;
  }
  throw ConvergenceError("growth envelope never covered the requested "
                         "area " +
                         format_double(*volume_at_h));
}

double lemma_difference_constant(Dimension dim, double gamma, double alpha,
                                 double a, double b, double c) {
  check_low_dimension(dim);
  check_lemma_exponent(dim, alpha);
  if (!(gamma > 0.0) || !(c > 0.0)) {
    throw PreconditionError("difference constant needs gamma > 0 and "
                            "c > 0");
  }
  if (!(a >= 1.0) || !(b > a)) {
    throw PreconditionError("difference constant needs 1 <= a < b; got a = " +
                            format_double(a) + ", b = " + format_double(b));
  }
  if (dim.n() == 3) {
    const double base = gamma * std::pow(c, alpha) /
                        (std::sqrt(8.0) * (std::sqrt(b) - std::sqrt(a)));
    return std::pow(base, 2.0 / (1.0 - 2.0 * alpha));
  }
  const double base =
      gamma * std::pow(c, alpha) / (std::sqrt(2.0) * std::log(b / a));
  return std::pow(base, -1.0 / alpha);
}

double r1_threshold(Dimension dim, double gamma, double alpha, double a,
                    double b, double c, double mass) {
  if (!(mass > 0.0)) {
    throw PreconditionError("mass must be positive, got " +
                            format_double(mass));
  }
  const double c_star = lemma_difference_constant(dim, gamma, alpha, a, b, c);
  const double r = c_star * std::pow(mass, lemma_power(dim, alpha));
  return std::fmax(r, schwarzschild_horizon_radius(dim, mass));
}

RoundLevelData round_levelset_data(Dimension dim, const AsymptoticProfile& ap,
                                   double mass, const GraphFunction& f) {
  if (f.dim().n() != dim.n()) {
    throw PreconditionError("graph dimension " + std::to_string(f.dim().n()) +
                            " does not match requested dimension " +
                            std::to_string(dim.n()));
  }
  const SchwarzschildProfile envelope = envelope_profile(dim, mass);

  RoundLevelData data;
  data.r1 = localization_radius(dim, ap, mass);
  data.h1 = ap.lambda + envelope.u(2.0 * data.r1);

  // Margin of the two difference inequalities at r1; both are positive at
  // or past the threshold radius, so epsilon > 0 unless the profile data
  // are inconsistent.
  const double alpha = ap.decay_exponent;
  const double eps1 = envelope.u(2.0 * data.r1) - envelope.u(data.r1) -
                      ap.gamma * std::pow(data.r1, alpha);
  const double eps2 = envelope.u(3.0 * data.r1) - envelope.u(2.0 * data.r1) -
                      ap.gamma * std::pow(3.0 * data.r1, alpha);
  data.epsilon = std::fmin(eps1, eps2);
  if (!(data.epsilon > 0.0)) {
    throw PreconditionError(
        "no containment margin at radius " + format_double(data.r1) +
        "; the decay amplitude " + format_double(ap.gamma) +
        " overwhelms the profile differences there");
  }

  data.inner_margin = kInf;
  data.outer_margin = kInf;
  for (int d = 0; d < 64; ++d) {
    const VecN dir = halton_direction(dim.n(), static_cast<uint64_t>(d));
    const double inner = f.value_extended(data.r1 * dir);
    const double outer = f.value_extended(3.0 * data.r1 * dir);
    data.inner_margin =
        std::fmin(data.inner_margin, (data.h1 - data.epsilon) - inner);
    data.outer_margin =
        std::fmin(data.outer_margin, outer - (data.h1 + data.epsilon));
  }
  return data;
}

EnvelopeVerdict envelope_check(const GraphFunction& f, double mass, double r1,
                               double h1) {
  check_low_dimension(f.dim());
  const SchwarzschildProfile envelope = envelope_profile(f.dim(), mass);
  const double horizon = schwarzschild_horizon_radius(f.dim(), mass);
  if (r1 < horizon * (1.0 - 1e-12)) {
    throw PreconditionError("r1 = " + format_double(r1) +
                            " lies inside the horizon radius " +
                            format_double(horizon));
  }
  const int n = f.dim().n();
  const int dirs = 16;

  // Containment precondition: the filled graph stays at or below h1 on the
  // closed ball (graphs that saturate the envelope touch it at radius r1).
  const double touch_tol = 1e-9 * (1.0 + std::fabs(h1));
  for (int d = 0; d < dirs; ++d) {
    const VecN dir = halton_direction(n, static_cast<uint64_t>(d));
    for (double frac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const VecN x = (frac * r1) * dir;
      const double v = f.value_extended(x);
      if (v - h1 > touch_tol) {
        throw PreconditionError(
            "the ball of radius " + format_double(r1) +
            " is not inside the sub-level set at height " +
            format_double(h1) + ": f = " + format_double(v) +
            " at radius " + format_double(frac * r1));
      }
      if (frac == 0.0) break;
    }
  }

  EnvelopeVerdict verdict;
  verdict.min_slack = kInf;
  const double s1 = envelope.u(r1);
  const double r_max = std::fmax(32.0 * r1, 64.0 * horizon);
  const int radii = 24;
  for (int i = 0; i < radii; ++i) {
    const double t = static_cast<double>(i) / (radii - 1);
    const double r = r1 * std::pow(r_max / r1, t);
    const double sr = envelope.u(r);
    for (int d = 0; d < dirs; ++d) {
      const VecN x = r * halton_direction(n, static_cast<uint64_t>(d));
      const double slack = sr - s1 + h1 - f.value_extended(x);
      ++verdict.samples;
      if (slack < verdict.min_slack) {
        verdict.min_slack = slack;
        verdict.r_at_min = r;
      }
    }
  }
  return verdict;
}

LowDimBound lowdim_height_bound(Dimension dim, const AsymptoticProfile& ap,
                                double mass, double rho) {
  check_low_dimension(dim);
  if (!(rho > 0.0)) {
    throw PreconditionError("radius rho must be positive, got " +
                            format_double(rho));
  }
  const SchwarzschildProfile envelope = envelope_profile(dim, mass);
  const Constants c = Constants::at(dim);

  LowDimBound bound;
  bound.r1 = localization_radius(dim, ap, mass);
  bound.h1 = ap.lambda + envelope.u(2.0 * bound.r1);
  bound.area_bound =
      c.omega * std::pow(3.0 * bound.r1, static_cast<double>(dim.n() - 1));
  bound.interior = height_bound(dim, mass, bound.area_bound);
  bound.exterior =
      rho <= bound.r1 ? 0.0 : envelope.u(rho) - envelope.u(bound.r1);
  bound.bound = bound.interior + bound.exterior;
  return bound;
}

void write_comparison_csv(const ComparisonSolution& sol,
                          const std::filesystem::path& path) {
  CsvWriter csv({"h", "Y"});
  for (size_t i = 0; i < sol.h.size(); ++i) {
    csv.add_row({format_double(sol.h[i]), format_double(sol.y[i])});
  }
  csv.write(path);
}

std::string comparison_json_header(const ComparisonSolution& sol) {
  nlohmann::json j;
  j["n"] = sol.dim.n();
  j["nodes"] = sol.h.size();
  if (sol.blow_up_height) {
    j["blow_up_height"] = *sol.blow_up_height;
    j["blow_up_half_width"] = sol.blow_up_half_width;
  } else {
    j["blow_up_height"] = nullptr;
  }
  if (sol.growth) {
    j["growth_fit"] = {{"coefficient", sol.growth->coefficient},
                       {"h_lo", sol.growth->h_lo},
                       {"h_hi", sol.growth->h_hi},
                       {"exponent", sol.growth->exponent},
                       {"certified", sol.growth->certified}};
  } else {
    j["growth_fit"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace gs
