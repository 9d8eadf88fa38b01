#include "graphstab/schwarzschild.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "graphstab/errors.hpp"
#include "graphstab/io.hpp"
#include "graphstab/mass.hpp"
#include "graphstab/quadrature.hpp"
#include "graphstab/sampling.hpp"

namespace gs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ipow(double x, int k) {
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= x;
  return p;
}

// sum_{j=0}^{k-1} r^j rm^(k-1-j), so that r^k - rm^k = (r - rm) * factor.
// Evaluating the difference this way avoids catastrophic cancellation just
// above the horizon.
double powdiff_factor(double r, double rm, int k) {
  double s = 0.0;
  double rj = 1.0;
  for (int j = 0; j < k; ++j) {
    s += rj * ipow(rm, k - 1 - j);
    rj *= r;
  }
  return s;
}

}  // namespace

double schwarzschild_horizon_radius(Dimension dim, double mass) {
  if (!(mass > 0.0)) throw PreconditionError("mass must be positive");
  return std::pow(2.0 * mass, 1.0 / (dim.n() - 2));
}

SchwarzschildProfile::SchwarzschildProfile(Dimension dim, double mass)
    : IntegratedRadial(schwarzschild_horizon_radius(dim, mass), true, true),
      dim_(dim),
      mass_(mass),
      horizon_(r_min()) {}

double SchwarzschildProfile::u(double r) const {
  if (r <= horizon_) return 0.0;
  const int n = dim_.n();
  if (n == 3) return std::sqrt(8.0 * mass_ * (r - 2.0 * mass_));
  if (n == 4) {
    const double s = std::sqrt(2.0 * mass_);
    return s * std::acosh(r / s);
  }
  return IntegratedRadial::u(r);
}

double SchwarzschildProfile::du_gap(double gap) const {
  if (!(gap > 0.0)) return kInf;
  const int n = dim_.n();
  const double D = gap * powdiff_factor(horizon_ + gap, horizon_, n - 2) /
                   (2.0 * mass_);
  return 1.0 / std::sqrt(D);
}

double SchwarzschildProfile::du(double r) const {
  return du_gap(r - horizon_);
}

double SchwarzschildProfile::d2u(double r) const {
  const int n = dim_.n();
  const double D =
      (r - horizon_) * powdiff_factor(r, horizon_, n - 2) / (2.0 * mass_);
  const double Dp = (n - 2) * ipow(r, n - 3) / (2.0 * mass_);
  return -0.5 * std::pow(D, -1.5) * Dp;
}

double SchwarzschildProfile::d3u(double r) const {
  const int n = dim_.n();
  const double D =
      (r - horizon_) * powdiff_factor(r, horizon_, n - 2) / (2.0 * mass_);
  const double Dp = (n - 2) * ipow(r, n - 3) / (2.0 * mass_);
  const double Dpp = (n - 2) * (n - 3) * ipow(r, n - 4) / (2.0 * mass_);
  return 0.75 * std::pow(D, -2.5) * Dp * Dp - 0.5 * std::pow(D, -1.5) * Dpp;
}

double SchwarzschildProfile::sup_height() const {
  if (dim_.n() <= 4) return kInf;
  return height_limit().value;
}

SchwarzschildProfile::HeightLimit SchwarzschildProfile::height_limit() const {
  const int n = dim_.n();
  if (n <= 4) {
    throw PreconditionError("height limit exists only for n >= 5");
  }
  std::call_once(limit_once_, [&] {
    // Tail enclosure from sqrt(2m) r^(-(n-2)/2) <= S' <= the same times
    // (1 - 2m R^(2-n))^(-1/2) for r >= R; widen R until the bracket closes.
    double R = 4.0 * horizon_;
    for (int i = 0; i < 40; ++i, R *= 2.0) {
      const double base =
          std::sqrt(2.0 * mass_) * (2.0 / (n - 4)) * std::pow(R, 2.0 - 0.5 * n);
      const double corr =
          1.0 / std::sqrt(1.0 - 2.0 * mass_ * std::pow(R, 2.0 - n));
      const double lo = base;
      const double hi = base * corr;
      const double head = IntegratedRadial::u(R);
      if (hi - lo < 1e-12 * std::fmax(1.0, head + lo)) {
        limit_ = {head + 0.5 * (lo + hi), 0.5 * (hi - lo) + 1e-12};
        return;
      }
    }
    throw ConvergenceError("height limit enclosure did not close");
  });
  return limit_;
}

RadialPtr make_schwarzschild_profile(Dimension dim, double mass) {
  return std::make_shared<SchwarzschildProfile>(dim, mass);
}

GraphPtr make_schwarzschild_graph(Dimension dim, double mass) {
  return make_rotational_graph(dim, make_schwarzschild_profile(dim, mass));
}

namespace {

class ConstantMass : public MassProfile {
 public:
  explicit ConstantMass(double mass) : mass_(mass) {
    if (!(mass > 0.0)) throw PreconditionError("mass must be positive");
  }
  double m(double) const override { return mass_; }
  double dm(double) const override { return 0.0; }
  double d2m(double) const override { return 0.0; }
  double mass_at_infinity() const override { return mass_; }
  bool nondecreasing() const override { return true; }

 private:
  double mass_;
};

class StepMass : public MassProfile {
 public:
  StepMass(double base, std::vector<MassStep> steps)
      : base_(base), steps_(std::move(steps)) {
    nondecreasing_ = true;
    for (const auto& s : steps_) {
      if (!(s.width > 0.0)) {
        throw PreconditionError("mass step width must be positive");
      }
      if (s.amplitude < 0.0) nondecreasing_ = false;
    }
  }

  double m(double r) const override {
    double v = base_;
    for (const auto& s : steps_) {
      v += s.amplitude * 0.5 * (1.0 + std::tanh((r - s.center) / s.width));
    }
    return v;
  }
  double dm(double r) const override {
    double v = 0.0;
    for (const auto& s : steps_) {
      const double t = std::tanh((r - s.center) / s.width);
      v += s.amplitude * 0.5 * (1.0 - t * t) / s.width;
    }
    return v;
  }
  double d2m(double r) const override {
    double v = 0.0;
    for (const auto& s : steps_) {
      const double t = std::tanh((r - s.center) / s.width);
      v += -s.amplitude * t * (1.0 - t * t) / (s.width * s.width);
    }
    return v;
  }
  double mass_at_infinity() const override {
    double v = base_;
    for (const auto& s : steps_) v += s.amplitude;
    return v;
  }
  bool nondecreasing() const override { return nondecreasing_; }

 private:
  double base_;
  std::vector<MassStep> steps_;
  bool nondecreasing_;
};

class PchipMass : public MassProfile {
 public:
  PchipMass(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const size_t k = x_.size();
    if (k < 2 || y_.size() != k) {
      throw PreconditionError("mass samples need at least two (r, m) pairs");
    }
    for (size_t i = 0; i + 1 < k; ++i) {
      if (!(x_[i + 1] > x_[i])) {
        throw PreconditionError("mass sample radii must be increasing");
      }
      if (y_[i + 1] < y_[i]) {
        throw PreconditionError("mass samples must be nondecreasing");
      }
    }
    slopes_ = fritsch_carlson(x_, y_);
  }

  double m(double r) const override { return eval(r, 0); }
  double dm(double r) const override { return eval(r, 1); }
  double d2m(double r) const override { return eval(r, 2); }
  double mass_at_infinity() const override { return y_.back(); }
  bool nondecreasing() const override { return true; }

 private:
  static std::vector<double> fritsch_carlson(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    const size_t k = x.size();
    std::vector<double> h(k - 1), delta(k - 1), d(k);
    for (size_t i = 0; i + 1 < k; ++i) {
      h[i] = x[i + 1] - x[i];
      delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    for (size_t i = 1; i + 1 < k; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0.0) return 0.0;
      if (d0 * d1 <= 0.0 && std::fabs(s) > 3.0 * std::fabs(d0)) {
        return 3.0 * d0;
      }
      return s;
    };
    if (k == 2) {
      d[0] = d[1] = delta[0];
    } else {
      d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
      d[k - 1] = end_slope(h[k - 2], h[k - 3], delta[k - 2], delta[k - 3]);
    }
    return d;
  }

  double eval(double r, int order) const {
    if (r <= x_.front()) return order == 0 ? y_.front() : 0.0;
    if (r >= x_.back()) return order == 0 ? y_.back() : 0.0;
    const size_t i =
        static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), r) -
                            x_.begin()) -
        1;
    const double h = x_[i + 1] - x_[i];
    const double t = (r - x_[i]) / h;
    const double y0 = y_[i], y1 = y_[i + 1];
    const double d0 = slopes_[i], d1 = slopes_[i + 1];
    if (order == 0) {
      return y0 * (2 * t * t * t - 3 * t * t + 1) +
             h * d0 * (t * t * t - 2 * t * t + t) +
             y1 * (-2 * t * t * t + 3 * t * t) + h * d1 * (t * t * t - t * t);
    }
    if (order == 1) {
      return y0 * (6 * t * t - 6 * t) / h + d0 * (3 * t * t - 4 * t + 1) +
             y1 * (6 * t - 6 * t * t) / h + d1 * (3 * t * t - 2 * t);
    }
    return y0 * (12 * t - 6) / (h * h) + d0 * (6 * t - 4) / h +
           y1 * (6 - 12 * t) / (h * h) + d1 * (6 * t - 2) / h;
  }

  std::vector<double> x_, y_, slopes_;
};

}  // namespace

MassPtr make_constant_mass(double mass) {
  return std::make_shared<ConstantMass>(mass);
}

MassPtr make_step_mass(double base, std::vector<MassStep> steps) {
  return std::make_shared<StepMass>(base, std::move(steps));
}

MassPtr make_pchip_mass(std::vector<double> r, std::vector<double> m) {
  return std::make_shared<PchipMass>(std::move(r), std::move(m));
}

MassPtr load_mass_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<double> rs, ms;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::array<double, 2> cols{};
    int found = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    bool bad = false;
    while (p < end && found < 3) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == ',')) ++p;
      if (p >= end) break;
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        bad = true;
        break;
      }
      if (found < 2) cols[static_cast<size_t>(found)] = v;
      ++found;
      p = res.ptr;
    }
    if (bad || found != 2) {
      // A single non-numeric line at the top is a header; anything later
      // is malformed.
      if (rs.empty() && line_no == 1) continue;
      throw ParseError("mass csv line " + std::to_string(line_no) +
                       " is not an (r, m) pair");
    }
    rs.push_back(cols[0]);
    ms.push_back(cols[1]);
  }
  if (rs.size() < 2) {
    throw ParseError("mass csv needs at least two (r, m) rows");
  }
  return make_pchip_mass(std::move(rs), std::move(ms));
}

namespace {

// u'(r) = sqrt(2 m(r) / (r^(n-2) - 2 m(r))), u(r_min) = 0, horizon start.
// The gap form r^(n-2) - 2 m(r) = (r - r_min) * powdiff_factor
// - 2 (m(r) - m(r_min)) absorbs the roundoff in the horizon condition, so
// the profile starts exactly at r_min.
class MassRadial : public IntegratedRadial {
 public:
  MassRadial(Dimension dim, MassPtr mass, double r_min)
      : IntegratedRadial(r_min, true, true),
        dim_(dim),
        mass_(std::move(mass)),
        m_horizon_(mass_->m(r_min)) {
    if (!(r_min > 0.0)) {
      throw PreconditionError("mass-prescribed profile needs r_min > 0");
    }
    const double env = ipow(r_min, dim.n() - 2);
    if (std::fabs(2.0 * m_horizon_ - env) > 1e-9 * env) {
      throw PreconditionError(
          "mass profile does not match the horizon: need 2 m(r_min) = "
          "r_min^(n-2)");
    }
    for (int k = 1; k <= 256; ++k) {
      const double r = r_min * std::pow(1e6, k / 256.0);
      if (!(mass_->m(r) > 0.0)) {
        throw PreconditionError("mass profile must stay positive");
      }
      if (!(envelope_gap(r) > 0.0)) {
        throw PreconditionError(
            "mass profile exceeds the envelope 2 m(r) < r^(n-2)");
      }
    }
  }

  double du(double r) const override { return du_gap(r - r_min()); }

  double d2u(double r) const override { return du(r) * psi(r); }

  double d3u(double r) const override {
    const int n = dim_.n();
    const double mm = mass_->m(r);
    const double mp = mass_->dm(r);
    const double mpp = mass_->d2m(r);
    const double D = envelope_gap(r);
    const double Dp = (n - 2) * ipow(r, n - 3) - 2.0 * mp;
    const double Dpp = (n - 2) * (n - 3) * ipow(r, n - 4) - 2.0 * mpp;
    const double ps = 0.5 * (mp / mm - Dp / D);
    const double psp = 0.5 * (mpp / mm - (mp / mm) * (mp / mm) - Dpp / D +
                              (Dp / D) * (Dp / D));
    return du(r) * (ps * ps + psp);
  }

  double sup_height() const override {
    if (dim_.n() <= 4) return kInf;
    std::call_once(sup_once_, [&] { sup_ = compute_sup(); });
    return sup_;
  }

  const MassProfile& mass() const { return *mass_; }

 protected:
  double du_gap(double gap) const override {
    if (!(gap > 0.0)) return kInf;
    const double r = r_min() + gap;
    const double mm = mass_->m(r);
    if (!(mm > 0.0)) {
      throw PreconditionError("mass profile must stay positive");
    }
    const double D = stable_envelope_gap(gap);
    if (!(D > 0.0)) {
      if (gap <= 1e-13 * std::fmax(1.0, r_min())) return kInf;
      throw PreconditionError(
          "mass profile exceeds the envelope 2 m(r) < r^(n-2)");
    }
    return std::sqrt(2.0 * mm / D);
  }

 private:
  // m(r_min + gap) - m(r_min). Short gaps integrate dm instead: the direct
  // difference of two nearly equal masses rounds to ulp(m) multiples, and
  // that noise would dominate the envelope gap near the horizon.
  double delta_mass(double gap) const {
    if (gap >= 1e-4 * std::fmax(1.0, r_min()))
      return mass_->m(r_min() + gap) - m_horizon_;
    const auto& gl = gauss_legendre(4);
    double sum = 0.0;
    for (const auto& node : gl)
      sum += 0.5 * gap * node.w *
             mass_->dm(r_min() + 0.5 * gap * (node.x + 1.0));
    return sum;
  }

  // r^(n-2) - 2 m(r) at r = r_min + gap, written through the horizon
  // condition 2 m(r_min) = r_min^(n-2) so both differences stay exact as
  // gap -> 0.
  double stable_envelope_gap(double gap) const {
    return gap * powdiff_factor(r_min() + gap, r_min(), dim_.n() - 2) -
           2.0 * delta_mass(gap);
  }

  // Subtracting r_min loses nothing here: for r < 2 r_min the subtraction
  // is exact, and beyond that the gap dominates r_min anyway.
  double envelope_gap(double r) const {
    return stable_envelope_gap(r - r_min());
  }

  double psi(double r) const {
    const int n = dim_.n();
    const double mm = mass_->m(r);
    const double mp = mass_->dm(r);
    const double D = envelope_gap(r);
    const double Dp = (n - 2) * ipow(r, n - 3) - 2.0 * mp;
    return 0.5 * (mp / mm - Dp / D);
  }

  double compute_sup() const {
    const int n = dim_.n();
    double R = std::fmax(4.0 * r_min(), 1.0);
    for (int i = 0; i < 40; ++i, R *= 2.0) {
      // Bracket the tail mass over [R, inf) by sampling; exact for
      // monotone profiles, conservative otherwise.
      double m_lo = mass_->mass_at_infinity();
      double m_hi = m_lo;
      for (int k = 0; k <= 64; ++k) {
        const double r = R * std::pow(1e6, k / 64.0);
        const double mm = mass_->m(r);
        m_lo = std::fmin(m_lo, mm);
        m_hi = std::fmax(m_hi, mm);
      }
      const double shell = std::pow(R, 2.0 - n);
      if (2.0 * m_hi * shell >= 1.0) continue;
      const double geom = (2.0 / (n - 4)) * std::pow(R, 2.0 - 0.5 * n);
      const double lo = std::sqrt(2.0 * m_lo) * geom;
      const double hi =
          std::sqrt(2.0 * m_hi) * geom / std::sqrt(1.0 - 2.0 * m_hi * shell);
      const double head = IntegratedRadial::u(R);
      if (hi - lo < 1e-11 * std::fmax(1.0, head + lo)) {
        return head + 0.5 * (lo + hi);
      }
    }
    throw ConvergenceError("height limit enclosure did not close");
  }

  Dimension dim_;
  MassPtr mass_;
  double m_horizon_;
  mutable std::once_flag sup_once_;
  mutable double sup_ = 0.0;
};

}  // namespace

RadialPtr profile_from_mass(Dimension dim, MassPtr mass, double r_min) {
  return std::make_shared<MassRadial>(dim, std::move(mass), r_min);
}

AsymptoticFit fit_schwarzschild_asymptotics(Dimension dim,
                                            const RadialProfile& profile,
                                            double r_hi) {
  const int n = dim.n();
  std::array<double, 4> r{};
  std::array<double, 4> mhat{};
  for (int k = 0; k < 4; ++k) {
    r[static_cast<size_t>(k)] = r_hi / static_cast<double>(8 >> k);
    const double rr = r[static_cast<size_t>(k)];
    const double p = profile.du(rr) * profile.du(rr);
    mhat[static_cast<size_t>(k)] = 0.5 * ipow(rr, n - 2) * p / (1.0 + p);
  }
  const PowerFit mass_fit = power_extrapolate(mhat[1], mhat[2], mhat[3]);
  const PowerFit mass_alt = power_extrapolate(mhat[0], mhat[1], mhat[2]);
  if (!(mass_fit.limit > 0.0)) {
    throw PreconditionError("asymptotic mass estimate is not positive");
  }

  SchwarzschildProfile envelope(dim, mass_fit.limit);
  std::array<double, 4> c{};
  for (int k = 0; k < 4; ++k) {
    const double rr = r[static_cast<size_t>(k)];
    c[static_cast<size_t>(k)] = profile.u(rr) - envelope.u(rr);
  }
  const PowerFit lam_fit = power_extrapolate(c[1], c[2], c[3]);
  const PowerFit lam_alt = power_extrapolate(c[0], c[1], c[2]);

  AsymptoticFit out;
  out.mass = mass_fit.limit;
  out.lambda = lam_fit.limit;
  out.rate = lam_fit.rate;
  out.residual = std::fmax(std::fabs(mass_fit.limit - mass_alt.limit),
                           std::fabs(lam_fit.limit - lam_alt.limit));
  return out;
}

AsymptoticCheck asymptotic_schwarzschild_check(const GraphFunction& f,
                                               double r0, double gamma,
                                               double alpha) {
  const int n = f.dim().n();
  if (!(r0 > 0.0)) {
    throw PreconditionError("asymptotic check needs r0 > 0, got " +
                            format_double(r0));
  }
  if (!(gamma > 0.0)) {
    throw PreconditionError("asymptotic check needs gamma > 0, got " +
                            format_double(gamma));
  }
  if (!(alpha < 2.0 - 0.5 * static_cast<double>(n))) {
    throw PreconditionError(
        "decay exponent " + format_double(alpha) + " must be below " +
        format_double(2.0 - 0.5 * static_cast<double>(n)) + " in dimension " +
        std::to_string(n) + "; slower decay does not pin down the offset");
  }
  double reach = 0.0;
  for (const BoundaryBall& ball : f.boundary()) {
    reach = std::fmax(reach, norm(ball.center) + ball.radius);
  }
  if (r0 < reach * (1.0 - 1e-12)) {
    throw PreconditionError("r0 = " + format_double(r0) +
                            " is inside the excised region (reach " +
                            format_double(reach) + ")");
  }

  const FluxSeries series = adm_mass(f);
  if (!series.converged_mass) {
    throw ConvergenceError("total mass did not converge: " +
                           series.convergence_certificate);
  }
  const double mass = *series.converged_mass;
  if (!(mass > 0.0)) {
    throw PreconditionError("asymptotic check needs positive mass, got " +
                            format_double(mass));
  }

  // Offset estimate: the median of f - S_m over a far annulus. The median
  // tolerates the admissible |x|^alpha wobble and any anisotropic part.
  const SchwarzschildProfile envelope(f.dim(), mass);
  const double horizon = schwarzschild_horizon_radius(f.dim(), mass);
  if (r0 < horizon * (1.0 - 1e-12)) {
    throw PreconditionError(
        "r0 = " + format_double(r0) + " lies inside the horizon radius " +
        format_double(horizon) + " of the estimated mass; the comparison " +
        "profile is undefined there");
  }
  const double r_far =
      std::fmax(std::fmax(64.0 * horizon, 8.0 * r0), 8.0 * reach);
  std::vector<double> offsets;
  const int far_radii = 33;
  const int far_dirs = 8;
  offsets.reserve(static_cast<size_t>(far_radii * far_dirs));
  for (int i = 0; i < far_radii; ++i) {
    const double t = static_cast<double>(i) / (far_radii - 1);
    const double r = r_far * std::pow(16.0, t);
    for (int d = 0; d < far_dirs; ++d) {
      const VecN x = r * halton_direction(n, static_cast<uint64_t>(d));
      offsets.push_back(f.value(x) - envelope.u(r));
    }
  }
  const auto mid = offsets.begin() + static_cast<long>(offsets.size() / 2);
  std::nth_element(offsets.begin(), mid, offsets.end());
  const double lambda = *mid;

  // Dense verification on (r0, r_far]: the claimed band must contain f.
  AsymptoticCheck out;
  out.lambda = lambda;
  out.mass = mass;
  out.r_check = r_far;
  out.max_violation = -kInf;
  const int radii = 48;
  const int dirs = 16;
  for (int i = 0; i < radii; ++i) {
    const double t = static_cast<double>(i + 1) / radii;
    const double r = r0 * std::pow(r_far / r0, t);
    const double band = gamma * std::pow(r, alpha);
    const double sr = envelope.u(r);
    for (int d = 0; d < dirs; ++d) {
      const VecN x = r * halton_direction(n, static_cast<uint64_t>(d));
      const double dev = std::fabs(f.value(x) - (lambda + sr));
      out.max_violation = std::fmax(out.max_violation, dev - band);
    }
  }
  out.pass = out.max_violation <= 0.0;
  return out;
}

}  // namespace gs
