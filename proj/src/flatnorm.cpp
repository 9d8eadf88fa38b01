#include "graphstab/flatnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "graphstab/errors.hpp"
#include "graphstab/io.hpp"
#include "graphstab/levelsets.hpp"
#include "graphstab/mass.hpp"
#include "graphstab/parallel.hpp"
#include "graphstab/quadrature.hpp"
#include "graphstab/radial_profile.hpp"

namespace gs {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Support radius of the pairing battery relative to rho, and the sup of
// |eta'| R for the bump eta(s) = (1 - (s/R)^2)^4: the maximum of
// 8u(1 - u^2)^3 over [0,1], attained at u = 1/sqrt(7).
constexpr double kBatteryRadiusFactor = 0.5;
const double kBumpSlopeSup = 1728.0 / std::pow(7.0, 3.5);

// Antiderivative int_0^theta cos^k t dt by the standard reduction
// I_k = (cos^(k-1) theta sin theta + (k-1) I_(k-2)) / k. Exact for the
// small integer k used here, so cap volumes carry no quadrature error.
double cos_power_integral(int k, double theta) {
  if (k == 0) return theta;
  double s = std::sin(theta);
  if (k == 1) return s;
  double c = std::cos(theta);
  double prev = theta;  // I_0
  double cur = s;       // I_1
  for (int j = 2; j <= k; ++j) {
    double next = (std::pow(c, j - 1) * s + (j - 1) * prev) / j;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Volume of the cap {x in B_r : x.e >= a}, a in [-r, r] signed toward e.
// With x.e = r sin(theta) the cross sections give
// beta_n r^n * int_(asin(a/r))^(pi/2) cos^n / (2 int_0^(pi/2) cos^n).
double cap_volume(Dimension dim, double r, double a) {
  int n = dim.n();
  double t = std::clamp(a / r, -1.0, 1.0);
  double half = cos_power_integral(n, std::acos(-1.0) / 2.0);
  double frac = (half - cos_power_integral(n, std::asin(t))) / (2.0 * half);
  return Constants::at(dim).beta * std::pow(r, n) * frac;
}

double slice_disk_radius(const Ball& U, double h) {
  double gap2 = U.rho * U.rho - (h - U.center_height) * (h - U.center_height);
  return gap2 <= 0.0 ? 0.0 : std::sqrt(gap2);
}

// Integral of fn over [a, b] when fn may behave like sqrt(x - a) at the
// left endpoint (horizon plateaus): the substitution x = a + t^2 restores
// a smooth integrand, and costs nothing when fn was already smooth.
double sqrt_left_simpson(const std::function<double(double)>& fn, double a,
                         double b, double abs_tol, double rel_tol) {
  if (b <= a) return 0.0;
  return adaptive_simpson(
      [&](double t) { return 2.0 * t * fn(a + t * t); }, 0.0,
      std::sqrt(b - a), abs_tol, rel_tol);
}

// The sublevel radius of a nondecreasing rotational graph switches
// representation at two heights: {f_filled < h} is empty below the filled
// minimum, a ball of radius r_of_h(h) between the minimum and the sup,
// and all of R^n above the sup. Minimal-boundary plateaus and bounded
// sups make the slice volume jump there, so the h-quadrature integrates
// each band separately with the band's own one-sided values (the band
// index is fixed per piece, which keeps every integrand continuous up to
// its endpoints).
enum class HeightBand { below_min, graph_range, above_sup };

// radius_cap short-circuits the inverse once the sublevel ball already
// covers everything the caller can see; profiles that approach a finite
// sup asymptotically have r_of_h blow up there, and the cap keeps the
// bracketing search away from that regime.
double band_radius(const RadialProfile& prof, double floor, double h,
                   HeightBand band, double radius_cap) {
  switch (band) {
    case HeightBand::below_min:
      return 0.0;
    case HeightBand::above_sup:
      return kInf;
    case HeightBand::graph_range:
      if (h <= floor) return prof.r_min();
      if (h >= prof.sup_height()) return kInf;
      if (prof.u(radius_cap) < h) return kInf;
      return prof.r_of_h(h);
  }
  return 0.0;
}

struct RegionMasses {
  double b_plus = 0.0;
  double b_minus = 0.0;
};

// Horizontal-slice quadrature for a rotational graph: at height h the
// ball U slices to an n-ball of radius s(h) at horizontal distance d from
// the symmetry axis, and the sublevel region is a concentric ball, so
// each slice volume is a closed-form two-ball intersection.
RegionMasses rotational_region_masses(const RadialProfile& prof, Dimension dim,
                                      double h0, const Ball& U) {
  const double beta = Constants::at(dim).beta;
  const double d = norm(U.center);
  const int n = dim.n();
  const double floor = prof.u(prof.r_min());
  const double sup = prof.sup_height();
  const double scale =
      beta * std::pow(U.rho, n) * U.rho + std::numeric_limits<double>::min();

  // Integrates slice volumes over [a, b] split at the band boundaries.
  // The quadrature variable is the polar angle h = center + rho sin(phi),
  // which turns the disk radius into rho cos(phi) and removes the
  // square-root behavior where the ball closes up.
  auto angle = [&](double h) {
    return std::asin(std::clamp((h - U.center_height) / U.rho, -1.0, 1.0));
  };
  auto integrate = [&](double a, double b, bool above_plane) {
    if (b <= a) return 0.0;
    std::vector<double> pts{a};
    for (double p : {floor, sup})
      if (p > pts.back() && p < b) pts.push_back(p);
    pts.push_back(b);
    double total = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      double mid = 0.5 * (pts[i] + pts[i + 1]);
      HeightBand band = mid < floor  ? HeightBand::below_min
                        : mid >= sup ? HeightBand::above_sup
                                     : HeightBand::graph_range;
      auto slice = [&](double phi) {
        double h = U.center_height + U.rho * std::sin(phi);
        double s = U.rho * std::cos(phi);
        double vol = ball_intersection_volume(
            dim, band_radius(prof, floor, h, band, d + s + 1.0), s, d);
        double v = above_plane ? beta * std::pow(s, n) - vol : vol;
        return v * U.rho * std::cos(phi);
      };
      double pa = angle(pts[i]);
      double pb = angle(pts[i + 1]);
      // For balls off the symmetry axis the sublevel ball reaches or
      // swallows the slice disk at interior heights, and the lens volume
      // has support edges there that uniform sampling can miss entirely.
      // Locate the disjoint/containment transitions and cut the piece.
      std::vector<double> cuts{pa, pb};
      if (band == HeightBand::graph_range && d > 0.0) {
        auto edge = [&](double phi, double sign) {
          double h = U.center_height + U.rho * std::sin(phi);
          double s = U.rho * std::cos(phi);
          double R = band_radius(prof, floor, h, band, d + s + 1.0);
          return std::isinf(R) ? 1.0 : R - (d + sign * s);
        };
        for (double sign : {-1.0, 1.0}) {
          const int kNodes = 128;
          double prev = edge(pa, sign);
          for (int k = 1; k <= kNodes; ++k) {
            double phi = pa + (pb - pa) * k / kNodes;
            double cur = edge(phi, sign);
            if ((prev < 0.0) != (cur < 0.0)) {
              double lo = pa + (pb - pa) * (k - 1) / kNodes;
              double hi = phi;
              bool lo_neg = prev < 0.0;
              for (int it = 0; it < 50; ++it) {
                double m2 = 0.5 * (lo + hi);
                ((edge(m2, sign) < 0.0) == lo_neg ? lo : hi) = m2;
              }
              cuts.push_back(0.5 * (lo + hi));
            }
            prev = cur;
          }
        }
        std::sort(cuts.begin(), cuts.end());
      }
      for (size_t k = 0; k + 1 < cuts.size(); ++k)
        total += adaptive_simpson(slice, cuts[k], cuts[k + 1], 1e-11 * scale,
                                  1e-9);
    }
    return std::max(total, 0.0);
  };

  double lo = U.center_height - U.rho;
  double hi = U.center_height + U.rho;
  RegionMasses out;
  out.b_minus = integrate(lo, std::min(h0, hi), false);
  out.b_plus = integrate(std::max(h0, lo), hi, true);
  return out;
}

// Midpoint-grid counting of the region volumes for a general dimension-3
// graph. Cells are classified by their filled value; the height interval
// each cell contributes to B_+/B_- inside the ball is carried exactly
// (the h-integral of the slice indicator over a fixed cell is an interval
// length), so the only error is the horizontal boundary layer.
RegionMasses grid_region_masses(const GraphFunction& f, double h0,
                                const Ball& U, int cells) {
  double dx = 2.0 * U.rho / cells;
  double cell_vol = dx * dx * dx;
  KahanSum plus;
  KahanSum minus;
  VecN x(3);
  for (int ix = 0; ix < cells; ++ix) {
    x[0] = U.center[0] - U.rho + (ix + 0.5) * dx;
    for (int iy = 0; iy < cells; ++iy) {
      x[1] = U.center[1] - U.rho + (iy + 0.5) * dx;
      for (int iz = 0; iz < cells; ++iz) {
        x[2] = U.center[2] - U.rho + (iz + 0.5) * dx;
        double r2 = norm2(x - U.center);
        if (r2 >= U.rho * U.rho) continue;
        double g = std::sqrt(U.rho * U.rho - r2);
        double lo = U.center_height - g;
        double hi = U.center_height + g;
        double fv = f.value_extended(x);
        plus.add(std::max(0.0, std::min(fv, hi) - std::max(h0, lo)));
        minus.add(std::max(0.0, std::min(h0, hi) - std::max(fv, lo)));
      }
    }
  }
  return {plus.value() * cell_vol, minus.value() * cell_vol};
}

double fill_in_mass(const GraphFunction& f, const Ball& U) {
  double total = 0.0;
  for (const BoundaryBall& b : f.boundary()) {
    double s = slice_disk_radius(U, b.plateau);
    if (s <= 0.0) continue;
    total += ball_intersection_volume(f.dim(), b.radius, s,
                                      norm(b.center - U.center));
  }
  return total;
}

double bump(double s, double radius) {
  double u = s / radius;
  if (u >= 1.0) return 0.0;
  double w = 1.0 - u * u;
  double w2 = w * w;
  return w2 * w2;
}

}  // namespace

Ball default_ball(Dimension dim, double h0, double rho) {
  Ball U;
  U.center = VecN(dim.n());
  U.center_height = h0;
  U.rho = rho;
  return U;
}

double ball_intersection_volume(Dimension dim, double r1, double r2,
                                double d) {
  if (r1 <= 0.0 || r2 <= 0.0) return 0.0;
  double small = std::min(r1, r2);
  double large = std::max(r1, r2);
  if (d <= large - small)
    return Constants::at(dim).beta * std::pow(small, dim.n());
  if (d >= r1 + r2) return 0.0;
  // Proper lens: caps on either side of the plane of intersection, whose
  // signed distances from the two centers sum to d.
  double a1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
  return cap_volume(dim, r1, a1) + cap_volume(dim, r2, d - a1);
}

FlatDecomposition flat_distance_upper(
    const GraphFunction& f, double h0, const Ball& U,
    const std::optional<AsymptoticProfile>& ap) {
  Dimension dim = f.dim();
  if (U.rho <= 0.0) throw PreconditionError("ball radius must be positive");
  if (U.center.n != dim.n())
    throw PreconditionError("ball center dimension does not match the graph");

  FluxSeries flux = adm_mass(f);
  if (!flux.converged_mass)
    throw ConvergenceError("flat distance needs a converged mass: " +
                           flux.convergence_certificate);
  double mass = *flux.converged_mass;
  if (mass < -1e-10)
    throw PreconditionError("flat distance bound requires nonnegative mass");
  mass = std::max(mass, 0.0);

  RegionMasses regions;
  const RadialProfile* prof = f.radial();
  if (prof != nullptr && prof->nondecreasing()) {
    regions = rotational_region_masses(*prof, dim, h0, U);
  } else if (dim.n() == 3) {
    // Two resolutions in ratio 2; the counting error is first order in
    // the cell size, so extrapolate it away.
    RegionMasses coarse = grid_region_masses(f, h0, U, 96);
    RegionMasses fine = grid_region_masses(f, h0, U, 192);
    regions.b_plus = std::max(0.0, 2.0 * fine.b_plus - coarse.b_plus);
    regions.b_minus = std::max(0.0, 2.0 * fine.b_minus - coarse.b_minus);
  } else {
    throw PreconditionError(
        "general graphs are sliced on the dimension-3 grid only; higher "
        "dimensions need a rotational profile");
  }

  FlatDecomposition dec;
  dec.mass_A = fill_in_mass(f, U);
  dec.mass_B_plus = regions.b_plus;
  dec.mass_B_minus = regions.b_minus;
  dec.total = dec.mass_A + dec.mass_B_plus + dec.mass_B_minus;
  dec.mass = mass;
  if (dim.n() >= 5 || ap.has_value())
    dec.bound = theorem_bound(dim, mass, U.rho, ap);
  return dec;
}

FlatBound theorem_bound(Dimension dim, double mass, double rho,
                        const std::optional<AsymptoticProfile>& ap) {
  if (rho <= 0.0) throw PreconditionError("ball radius must be positive");
  if (mass < 0.0)
    throw PreconditionError("flat distance bound requires nonnegative mass");
  int n = dim.n();
  if (n <= 4 && !ap.has_value())
    throw PreconditionError(
        "dimensions 3 and 4 need the asymptotic profile for the "
        "flat-distance bound");
  FlatBound out;
  if (mass == 0.0) return out;

  const Constants& cs = Constants::at(dim);
  // Sharp isoperimetric volume at a given boundary area:
  // |E| <= (|bd E| / (n beta^(1/n)))^(n/(n-1)).
  auto iso_volume = [&](double area) {
    return std::pow(area / (n * std::pow(cs.beta, 1.0 / n)),
                    n / (n - 1.0));
  };
  double horizon_area = cs.omega * std::pow(2.0 * mass, (n - 1.0) / (n - 2.0));

  out.fill_in = iso_volume(horizon_area);
  out.below_plane = rho * iso_volume(h_zero_threshold(dim, mass));
  out.height_term = n >= 5 ? height_bound(dim, mass)
                           : lowdim_height_bound(dim, *ap, mass, rho).bound;
  out.above_plane = cs.beta * std::pow(rho, n) * out.height_term;
  out.value = out.fill_in + out.below_plane + out.above_plane;
  return out;
}

ColumnMasses masses_by_columns(const GraphFunction& f, double h0,
                               const Ball& U) {
  Dimension dim = f.dim();
  if (U.rho <= 0.0) throw PreconditionError("ball radius must be positive");
  const RadialProfile* prof = f.radial();
  if (prof == nullptr || !prof->nondecreasing())
    throw PreconditionError(
        "column masses need a rotational graph with nondecreasing profile");
  if (norm(U.center) > 1e-12 * U.rho)
    throw PreconditionError(
        "column masses need the ball centered on the symmetry axis");

  const int n = dim.n();
  const double c = U.center_height;
  const double scale = std::pow(U.rho, n) * U.rho / n +
                       std::numeric_limits<double>::min();
  auto fv = [&](double r) { return prof->u(std::max(r, prof->r_min())); };
  auto chord = [&](double r) {
    return std::sqrt(std::max(0.0, U.rho * U.rho - r * r));
  };

  // The column lengths are min/max clippings of the filled graph against
  // the plane and the ball chord, so their kinks and support edges sit
  // where those surfaces cross. Splitting there keeps every piece smooth
  // and, more importantly, stops the adaptive rule from sampling straight
  // past a support interval much narrower than the ball.
  std::vector<double> pts{0.0, U.rho};
  auto push = [&](double r) {
    if (r > 0.0 && r < U.rho) pts.push_back(r);
  };
  push(prof->r_min());
  if (std::abs(h0 - c) < U.rho)
    push(std::sqrt(U.rho * U.rho - (h0 - c) * (h0 - c)));
  auto scan_roots = [&](auto fn) {
    const int kNodes = 256;
    double prev = fn(0.0);
    for (int i = 1; i <= kNodes; ++i) {
      double r = U.rho * i / kNodes;
      double cur = fn(r);
      if ((prev < 0.0) != (cur < 0.0)) {
        double lo = U.rho * (i - 1) / kNodes;
        double hi = r;
        bool lo_neg = prev < 0.0;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          ((fn(mid) < 0.0) == lo_neg ? lo : hi) = mid;
        }
        push(0.5 * (lo + hi));
      }
      prev = cur;
    }
  };
  scan_roots([&](double r) { return fv(r) - h0; });
  scan_roots([&](double r) { return fv(r) - (c + chord(r)); });
  scan_roots([&](double r) { return fv(r) - (c - chord(r)); });
  std::sort(pts.begin(), pts.end());

  // r = rho sin(phi) makes the chord 2 rho cos(phi) smooth at the disk
  // edge; flattening the left endpoint of every piece absorbs the
  // square-root height growth that horizon plateaus start with.
  auto integrate = [&](auto len) {
    auto in_phi = [&](double phi) {
      double r = U.rho * std::sin(phi);
      double g = U.rho * std::cos(phi);
      return len(fv(r), g) * std::pow(r, n - 1) * U.rho * std::cos(phi);
    };
    double total = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i + 1] - pts[i] <= 1e-14 * U.rho) continue;
      double pa = std::asin(std::clamp(pts[i] / U.rho, 0.0, 1.0));
      double pb = std::asin(std::clamp(pts[i + 1] / U.rho, 0.0, 1.0));
      total += sqrt_left_simpson(in_phi, pa, pb, 1e-11 * scale, 1e-9);
    }
    return Constants::at(dim).omega * total;
  };

  ColumnMasses out;
  out.mass_B_plus = integrate([&](double fvr, double g) {
    return std::max(0.0, std::min(fvr, c + g) - std::max(h0, c - g));
  });
  out.mass_B_minus = integrate([&](double fvr, double g) {
    return std::max(0.0, std::min(h0, c + g) - std::max(fvr, c - g));
  });
  return out;
}

PairingCheck pairing_check(const GraphFunction& f, double h0,
                           const FlatDecomposition& dec, double center_height,
                           double radius) {
  Dimension dim = f.dim();
  if (radius <= 0.0)
    throw PreconditionError("pairing form needs a positive support radius");
  const RadialProfile* prof = f.radial();
  if (prof == nullptr)
    throw PreconditionError("pairing battery needs a rotational graph");

  const int n = dim.n();
  // (graph - plane)(omega): both currents pull the form back to R^n with
  // unit Jacobian, so the pairing is the difference of two radial
  // integrals of eta against the distance to X0 = (0, center_height).
  // The graph term starts at r_min; the fill-in currents A are exactly
  // the difference between the graph and its filled extension, so this
  // difference is the full A(omega) + B(d omega).
  auto graph_term = [&](double r) {
    double dist = std::hypot(r, prof->u(r) - center_height);
    return std::pow(r, n - 1) * bump(dist, radius);
  };
  auto plane_term = [&](double r) {
    double dist = std::hypot(r, h0 - center_height);
    return std::pow(r, n - 1) * bump(dist, radius);
  };

  double scale = std::pow(radius, n) / n +
                 std::numeric_limits<double>::min();
  double graph_part =
      prof->r_min() < radius
          ? sqrt_left_simpson(graph_term, prof->r_min(), radius,
                              1e-12 * scale, 1e-10)
          : 0.0;
  double plane_part =
      adaptive_simpson(plane_term, 0.0, radius, 1e-12 * scale, 1e-10);

  PairingCheck out;
  out.center_height = center_height;
  out.radius = radius;
  out.pairing = Constants::at(dim).omega * (graph_part - plane_part);
  out.bound = dec.mass_A + (dec.mass_B_plus + dec.mass_B_minus) *
                               (kBumpSlopeSup / radius);
  out.pass = std::abs(out.pairing) <= out.bound * (1.0 + 1e-9) + 1e-12;
  return out;
}

StudyTable convergence_study(const std::vector<GraphPtr>& family, double rho,
                             const std::optional<AsymptoticProfile>& ap,
                             bool with_pairing, int threads) {
  if (family.empty())
    throw PreconditionError("convergence study needs at least one graph");
  Dimension dim = family.front()->dim();
  if (dim.n() <= 4 && !ap.has_value())
    throw PreconditionError(
        "dimensions 3 and 4 need the asymptotic profile for the "
        "flat-distance bound");
  for (const GraphPtr& g : family)
    if (g->dim().n() != dim.n())
      throw PreconditionError("family members must share one dimension");

  Ball U = default_ball(dim, 0.0, rho);
  auto rows = parallel_map<StudyRow>(
      static_cast<int>(family.size()), threads, [&](int i) {
        const GraphFunction& g = *family[static_cast<size_t>(i)];
        StudyRow row;
        row.dec = flat_distance_upper(g, 0.0, U, ap);
        row.mass = row.dec.mass;

        // Members must arrive vertically normalized: the level-set area
        // reaches twice the horizon area exactly at height zero.
        double h0 = h_zero(g, row.mass);
        double tol =
            1e-8 * (1.0 + std::pow(2.0 * row.mass, 1.0 / (dim.n() - 2.0)));
        if (std::abs(h0) > tol)
          throw PreconditionError(
              "family member is not normalized: h_zero = " +
              format_double(h0));

        if (with_pairing) {
          double radius = kBatteryRadiusFactor * rho;
          for (double ch : {0.0, rho / 4.0, -rho / 4.0})
            row.pairings.push_back(pairing_check(g, 0.0, row.dec, ch, radius));
        }
        return row;
      });

  for (size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].mass < rows[i - 1].mass))
      throw PreconditionError(
          "convergence study needs strictly decreasing masses");
  for (const StudyRow& row : rows) {
    if (row.dec.total > row.dec.bound->value * (1.0 + 1e-9))
      throw Error("flat upper bound " + format_double(row.dec.total) +
                  " exceeds its theorem bound " +
                  format_double(row.dec.bound->value));
    for (const PairingCheck& pc : row.pairings)
      if (!pc.pass)
        throw Error("pairing " + format_double(pc.pairing) +
                    " exceeds its mass bound " + format_double(pc.bound));
  }
  if (rows.size() >= 2 && !(rows.back().dec.total < rows.front().dec.total))
    throw Error("flat upper bounds do not decrease along the family");

  return StudyTable{dim, rho, std::move(rows)};
}

void write_flat_study_csv(const StudyTable& table,
                          const std::filesystem::path& path) {
  CsvWriter csv({"m", "d_flat_upper", "bound", "mass_A", "mass_B_plus",
                 "mass_B_minus"});
  for (const StudyRow& row : table.rows) {
    double bound = row.dec.bound ? row.dec.bound->value
                                 : std::numeric_limits<double>::quiet_NaN();
    csv.add_row({format_double(row.mass), format_double(row.dec.total),
                 format_double(bound), format_double(row.dec.mass_A),
                 format_double(row.dec.mass_B_plus),
                 format_double(row.dec.mass_B_minus)});
  }
  csv.write(path);
}

std::string flat_study_json(const StudyTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const StudyRow& row : table.rows) {
    nlohmann::json r{{"m", row.mass},
                     {"d_flat_upper", row.dec.total},
                     {"mass_A", row.dec.mass_A},
                     {"mass_B_plus", row.dec.mass_B_plus},
                     {"mass_B_minus", row.dec.mass_B_minus}};
    if (row.dec.bound) {
      r["bound"] = row.dec.bound->value;
      r["bound_terms"] = {{"fill_in", row.dec.bound->fill_in},
                          {"below_plane", row.dec.bound->below_plane},
                          {"above_plane", row.dec.bound->above_plane},
                          {"height_term", row.dec.bound->height_term}};
    }
    if (!row.pairings.empty()) {
      nlohmann::json checks = nlohmann::json::array();
      for (const PairingCheck& pc : row.pairings)
        checks.push_back({{"center_height", pc.center_height},
                          {"radius", pc.radius},
                          {"pairing", pc.pairing},
                          {"bound", pc.bound},
                          {"pass", pc.pass}});
      r["pairings"] = checks;
    }
    rows.push_back(r);
  }
  nlohmann::json doc{{"n", table.dim.n()}, {"rho", table.rho},
                     {"rows", rows}};
  return doc.dump(2) + "\n";
}

}  // namespace gs
