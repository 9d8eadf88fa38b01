#include "graphstab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "graphstab/analytic_graphs.hpp"
#include "graphstab/curvature.hpp"
#include "graphstab/errors.hpp"
#include "graphstab/flatnorm.hpp"
#include "graphstab/io.hpp"
#include "graphstab/levelsets.hpp"
#include "graphstab/mass.hpp"
#include "graphstab/sampling.hpp"

namespace gs {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mutable state threaded through one run: accumulated checks, artifact
// names, and the summary document under construction.
struct RunState {
  const RunOptions& opt;
  Scenario sc;
  json summary;
  json checks = json::array();
  std::vector<std::string> artifacts;
  bool all_pass = true;

  void add_check(const std::string& name, int member, bool pass, double value,
                 double threshold, const std::string& detail = "") {
    json c{{"name", name}, {"pass", pass}};
    if (member >= 0) c["member"] = member;
    if (std::isfinite(value)) c["value"] = value;
    if (std::isfinite(threshold)) c["threshold"] = threshold;
    if (!detail.empty()) c["detail"] = detail;
    checks.push_back(c);
    all_pass = all_pass && pass;
  }

  std::filesystem::path artifact(const std::string& name) {
    artifacts.push_back(name);
    return opt.output_dir / name;
  }

  bool want_json() const { return opt.format == RunOptions::Format::json; }
};

bool mass_parameterized(FamilyKind kind) {
  return kind != FamilyKind::explicit_rotational;
}

double declared_mass(const RunState& st, size_t member) {
  return mass_parameterized(st.sc.kind) ? st.sc.masses[member] : kNaN;
}

// Largest sampling radius with finite graph values: profiles like the
// lower hemisphere live on a bounded disk, so the annulus shrinks until
// the value is finite.
double finite_radius(const GraphFunction& f, double hi) {
  VecN x(f.dim().n());
  for (int i = 0; i < 80; ++i) {
    x[0] = hi;
    if (std::isfinite(f.value_extended(x))) return hi;
    hi *= 0.8;
  }
  throw PreconditionError("no finite sampling radius found for the graph");
}

// ---------------------------------------------------------------- verify

void run_verify(RunState& st) {
  const auto family = build_family(st.sc);
  const double cross_tol = std::max(st.sc.tol, 1e-10);
  CsvWriter csv({"member", "m", "max_cross_residual", "min_scalar_curvature",
                 "adm_mass", "mass_error", "penrose_ratio"});
  json members = json::array();

  for (size_t i = 0; i < family.size(); ++i) {
    const GraphFunction& f = *family[i];
    const double m = declared_mass(st, i);
    double r_lo = 0.05;
    for (const BoundaryBall& b : f.boundary())
      r_lo = std::max(r_lo, 1.05 * (norm(b.center) + b.radius));
    const double r_hi = finite_radius(f, 3.0 * r_lo + 5.0);

    double worst_cross = 0.0;
    double min_r = std::numeric_limits<double>::infinity();
    VecN worst_x(f.dim().n());
    for (int k = 0; k < 200; ++k) {
      VecN x = halton_annulus_point(f.dim().n(), st.sc.seed + k, r_lo, r_hi);
      const double rr = scalar_curvature_reilly(f, x);
      const double rg = scalar_curvature_gauss(f, x);
      const double h = graph_mean_curvature(f, x);
      const double denom = std::max({std::abs(rr), std::abs(rg), h * h, 1.0});
      worst_cross = std::max(worst_cross, std::abs(rr - rg) / denom);
      if (rr / denom < min_r) {
        min_r = rr / denom;
        worst_x = x;
      }
    }
    st.add_check("curvature-cross-check", static_cast<int>(i),
                 worst_cross <= cross_tol, worst_cross, cross_tol);

    const bool expects_nonneg = st.sc.kind == FamilyKind::schwarzschild ||
                                st.sc.kind == FamilyKind::mass_profile;
    if (expects_nonneg) {
      const bool ok = min_r >= -std::max(st.sc.tol, 1e-8);
      std::string detail;
      if (!ok)
        detail = "scalar curvature negative: normalized R = " +
                 format_double(min_r) + " at |x| = " +
                 format_double(norm(worst_x));
      st.add_check("nonnegative-scalar-curvature", static_cast<int>(i), ok,
                   min_r, -std::max(st.sc.tol, 1e-8), detail);
    }

    double adm = kNaN;
    double mass_err = kNaN;
    double penrose = kNaN;
    if (mass_parameterized(st.sc.kind)) {
      FluxSeries fs = adm_mass(f);
      if (!fs.converged_mass)
        throw ConvergenceError("adm mass did not converge: " +
                               fs.convergence_certificate);
      adm = *fs.converged_mass;
      mass_err = std::abs(adm - m) / m;
      const double mass_tol =
          st.sc.kind == FamilyKind::schwarzschild ? 1e-4 : 1e-3;
      st.add_check("mass-recovery", static_cast<int>(i), mass_err <= mass_tol,
                   mass_err, mass_tol);
      if (!f.boundary().empty()) {
        penrose = penrose_ratio(f, m);
        st.add_check("penrose-ratio", static_cast<int>(i),
                     penrose >= 1.0 - 1e-9, penrose, 1.0);
      }
    }

    csv.add_row({std::to_string(i), format_double(m),
                 format_double(worst_cross), format_double(min_r),
                 format_double(adm), format_double(mass_err),
                 format_double(penrose)});
    members.push_back(json{{"member", i},
                           {"max_cross_residual", worst_cross},
                           {"min_scalar_curvature", min_r}});
  }

  if (st.want_json()) {
    json doc{{"members", members}, {"checks", st.checks}};
    write_text_file(st.artifact("verify.json"), doc.dump(2) + "\n");
  } else {
    csv.write(st.artifact("verify.csv"));
  }
}

// ------------------------------------------------------------------ mass

void run_mass(RunState& st) {
  const auto family = build_family(st.sc);
  CsvWriter csv({"member", "m_declared", "r", "flux"});
  json members = json::array();
  std::string failure;

  for (size_t i = 0; i < family.size(); ++i) {
    const double m = declared_mass(st, i);
    FluxSeries fs = adm_mass(*family[i]);
    for (size_t k = 0; k < fs.radii.size(); ++k)
      csv.add_row({std::to_string(i), format_double(m),
                   format_double(fs.radii[k]),
                   format_double(fs.flux_values[k])});
    json rec{{"member", i},
             {"monotone", fs.monotone},
             {"worst_step", fs.worst_step},
             {"certificate", fs.convergence_certificate}};
    if (fs.converged_mass) {
      rec["adm_mass"] = *fs.converged_mass;
      if (mass_parameterized(st.sc.kind)) {
        const double err = std::abs(*fs.converged_mass - m) / m;
        const double mass_tol =
            st.sc.kind == FamilyKind::schwarzschild ? 1e-4 : 1e-3;
        rec["mass_error"] = err;
        st.add_check("mass-recovery", static_cast<int>(i), err <= mass_tol,
                     err, mass_tol);
      }
    } else if (failure.empty()) {
      failure = fs.convergence_certificate;
    }
    st.add_check("flux-monotone", static_cast<int>(i), fs.monotone,
                 fs.worst_step, 0.0);
    members.push_back(rec);
  }

  if (st.want_json()) {
    json doc{{"members", members}};
    write_text_file(st.artifact("mass.json"), doc.dump(2) + "\n");
  } else {
    csv.write(st.artifact("mass.csv"));
  }
  st.summary["members"] = members;
  if (!failure.empty())
    throw ConvergenceError("adm mass did not converge: " + failure);
}

// ------------------------------------------------------------- levelsets

std::vector<double> member_levels(const GraphFunction& f, const StudySpec& sp,
                                  uint64_t seed) {
  double floor;
  double hi;
  if (const RadialProfile* prof = f.radial(); prof != nullptr) {
    floor = prof->u(prof->r_min());
    hi = prof->u(finite_radius(f, prof->r_min() + sp.rho));
  } else {
    floor = std::numeric_limits<double>::infinity();
    for (const BoundaryBall& b : f.boundary())
      floor = std::min(floor, b.plateau);
    hi = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 128; ++k) {
      VecN x = halton_annulus_point(f.dim().n(), seed + k, 0.0, sp.rho);
      const double v = f.value_extended(x);
      floor = std::min(floor, v);
      hi = std::max(hi, v);
    }
  }
  const double sup = f.sup_height();
  if (std::isfinite(sup))
    hi = std::min(hi, sup - 1e-6 * (1.0 + std::abs(sup)));
  if (!(hi > floor))
    throw PreconditionError("level ladder is empty: graph range too small");
  std::vector<double> levels;
  for (int k = 0; k < sp.levels; ++k)
    levels.push_back(floor + (hi - floor) * (k + 1) / (sp.levels + 1));
  return levels;
}

void run_levelsets(RunState& st) {
  const auto family = build_family(st.sc);
  json members = json::array();
  for (size_t i = 0; i < family.size(); ++i) {
    const GraphFunction& f = *family[i];
    VolumeFunction vf = volume_function(
        f, member_levels(f, st.sc.study, st.sc.seed), st.opt.threads);
    const std::string stem = "volume_" + std::to_string(i);
    if (st.want_json()) {
      json rows = json::array();
      for (const LevelSample& s : vf.samples)
        rows.push_back(json{{"h", s.h},
                            {"volume", s.volume},
                            {"v_prime", s.v_prime},
                            {"regular", s.regular},
                            {"convex_verified", s.convex_verified}});
      json doc{{"member", i}, {"monotone", vf.monotone}, {"samples", rows}};
      write_text_file(st.artifact(stem + ".json"), doc.dump(2) + "\n");
    } else {
      write_volume_csv(vf, st.artifact(stem + ".csv"));
    }
    st.add_check("volume-monotone", static_cast<int>(i), vf.monotone, kNaN,
                 kNaN);
    json rec{{"member", i}, {"monotone", vf.monotone}, {"h_max", vf.h_max}};
    if (mass_parameterized(st.sc.kind))
      rec["h_zero"] = h_zero(f, st.sc.masses[i]);
    members.push_back(rec);
  }
  st.summary["members"] = members;
}

// ------------------------------------------------------------------- ode

void run_ode(RunState& st) {
  const Dimension dim = st.sc.dim;
  const double budget = dim.n() == 3 ? 400.0 : 50.0;
  ComparisonSolution sol = integrate_comparison(dim, budget);
  write_comparison_csv(sol, st.artifact("comparison.csv"));
  write_text_file(st.artifact("comparison.json"),
                  comparison_json_header(sol));

  st.add_check("initial-value-exact", -1,
               sol.y.front() == ode_initial_value(dim), sol.y.front(),
               ode_initial_value(dim));
  if (dim.n() >= 5) {
    const double quad = blow_up_by_quadrature(dim);
    const double rel =
        std::abs(*sol.blow_up_height - quad) / std::abs(quad);
    st.add_check("blow-up-estimators-agree", -1, rel <= 1e-6, rel, 1e-6);
    st.summary["blow_up_height"] = *sol.blow_up_height;
    st.summary["blow_up_by_quadrature"] = quad;
  } else {
    const GrowthFit& g = *sol.growth;
    st.add_check("growth-envelope-certified", -1, g.certified, g.coefficient,
                 kNaN);
    const double limit = dim.n() == 3 ? 4.0 : 2.0 / std::sqrt(6.0);
    st.add_check("growth-exponent", -1,
                 std::abs(g.exponent - limit) <= 0.05 * limit, g.exponent,
                 limit);
    st.summary["growth_coefficient"] = g.coefficient;
    st.summary["growth_exponent"] = g.exponent;
  }
}

// -------------------------------------------------------------- flatnorm

void run_flatnorm(RunState& st) {
  if (!mass_parameterized(st.sc.kind))
    throw PreconditionError(
        "flat-norm runs need a mass-parameterized family");
  const double m = st.sc.masses.front();
  GraphPtr g;
  double h0;
  if (st.sc.kind == FamilyKind::schwarzschild_plus_bump) {
    g = build_member(st.sc, m);
    h0 = h_zero(*g, m);
  } else {
    g = build_normalized_member(st.sc, m);
    h0 = 0.0;
  }
  const Ball U = default_ball(st.sc.dim, h0, st.sc.study.rho);
  const FlatDecomposition dec =
      flat_distance_upper(*g, h0, U, st.sc.asymptotics);

  if (dec.bound) {
    st.add_check("bound-holds", -1, dec.total <= dec.bound->value * (1 + 1e-9),
                 dec.total, dec.bound->value);
  }
  if (g->radial() != nullptr && g->radial()->nondecreasing()) {
    const ColumnMasses cols = masses_by_columns(*g, h0, U);
    const double scale = dec.mass_B_plus + dec.mass_B_minus +
                         std::numeric_limits<double>::min();
    const double rel = (std::abs(cols.mass_B_plus - dec.mass_B_plus) +
                        std::abs(cols.mass_B_minus - dec.mass_B_minus)) /
                       scale;
    st.add_check("slicing-orders-agree", -1, rel <= 1e-4, rel, 1e-4);
  }
  if (st.sc.study.with_pairing && g->radial() != nullptr) {
    for (double c : {0.0, 0.25 * U.rho, -0.25 * U.rho}) {
      PairingCheck pc = pairing_check(*g, h0, dec, h0 + c, 0.5 * U.rho);
      st.add_check("pairing-bound", -1, pc.pass, std::abs(pc.pairing),
                   pc.bound);
    }
  }

  json doc{{"m", m},
           {"rho", U.rho},
           {"d_flat_upper", dec.total},
           {"mass_A", dec.mass_A},
           {"mass_B_plus", dec.mass_B_plus},
           {"mass_B_minus", dec.mass_B_minus}};
  CsvWriter csv({"m", "d_flat_upper", "bound", "mass_A", "mass_B_plus",
                 "mass_B_minus"});
  csv.add_row({format_double(m), format_double(dec.total),
               format_double(dec.bound ? dec.bound->value : kNaN),
               format_double(dec.mass_A), format_double(dec.mass_B_plus),
               format_double(dec.mass_B_minus)});
  if (dec.bound) {
    doc["bound"] = dec.bound->value;
    doc["bound_terms"] = json{{"fill_in", dec.bound->fill_in},
                              {"below_plane", dec.bound->below_plane},
                              {"above_plane", dec.bound->above_plane},
                              {"height_term", dec.bound->height_term}};
  }
  if (st.want_json()) {
    write_text_file(st.artifact("flatnorm.json"), doc.dump(2) + "\n");
  } else {
    csv.write(st.artifact("flatnorm.csv"));
  }
  st.summary["decomposition"] = doc;
}

// ----------------------------------------------------------------- study

void run_study(RunState& st) {
  if (!mass_parameterized(st.sc.kind) ||
      st.sc.kind == FamilyKind::schwarzschild_plus_bump)
    throw PreconditionError(
        "convergence studies need a schwarzschild or mass-profile family");
  for (size_t i = 0; i + 1 < st.sc.masses.size(); ++i)
    if (!(st.sc.masses[i + 1] < st.sc.masses[i]))
      throw ParseError(
          "scenario: the mass ladder must be strictly decreasing for "
          "convergence studies");

  std::vector<GraphPtr> family;
  for (double m : st.sc.masses)
    family.push_back(build_normalized_member(st.sc, m));
  const StudyTable table =
      convergence_study(family, st.sc.study.rho, st.sc.asymptotics,
                        st.sc.study.with_pairing, st.opt.threads);

  if (st.want_json()) {
    write_text_file(st.artifact("study.json"), flat_study_json(table));
  } else {
    write_flat_study_csv(table, st.artifact("study.csv"));
  }

  const double initial = table.rows.front().dec.total;
  const double final_total = table.rows.back().dec.total;
  st.add_check("totals-decreasing", -1,
               table.rows.size() < 2 || final_total < initial, final_total,
               initial);
  bool bounds_ok = true;
  for (const StudyRow& row : table.rows)
    bounds_ok = bounds_ok && row.dec.bound &&
                row.dec.total <= row.dec.bound->value * (1 + 1e-9);
  st.add_check("bounds-hold", -1, bounds_ok, kNaN, kNaN);
  st.summary["rows"] = table.rows.size();
  st.summary["initial_total"] = initial;
  st.summary["final_total"] = final_total;
  if (table.rows.size() >= 2)
    st.summary["final_over_initial"] = final_total / initial;
}

}  // namespace

RunReport run_scenario(const RunOptions& opt) {
  RunReport report;
  json summary;
  summary["command"] = opt.command;
  summary["scenario"] = opt.scenario_path.string();
  try {
    RunState st{opt, load_scenario(opt.scenario_path), json::object(),
                json::array(), {}, true};
    if (opt.dimension) {
      if (*opt.dimension < 3 || *opt.dimension > 32)
        throw ParseError("dimension override must be an integer >= 3");
      st.sc.dim = Dimension(*opt.dimension);
    }
    if (opt.tol) {
      if (!(*opt.tol > 0.0))
        throw ParseError("tolerance override must be positive");
      st.sc.tol = *opt.tol;
    }
    std::filesystem::create_directories(opt.output_dir);

    if (opt.command == "verify")
      run_verify(st);
    else if (opt.command == "mass")
      run_mass(st);
    else if (opt.command == "levelsets")
      run_levelsets(st);
    else if (opt.command == "ode")
      run_ode(st);
    else if (opt.command == "flatnorm")
      run_flatnorm(st);
    else if (opt.command == "study")
      run_study(st);
    else
      throw ParseError("unknown command \"" + opt.command + "\"");

    summary.update(st.summary);
    summary["checks"] = st.checks;
    summary["artifacts"] = st.artifacts;
    summary["status"] = st.all_pass ? 0 : 1;
    report.status = st.all_pass ? 0 : 1;
    report.artifacts = st.artifacts;
  } catch (const ParseError& e) {
    summary["status"] = report.status = 2;
    summary["error"] = "parse";
    summary["message"] = e.what();
  } catch (const ConvergenceError& e) {
    summary["status"] = report.status = 3;
    summary["error"] = "convergence";
    summary["message"] = e.what();
  } catch (const PreconditionError& e) {
    summary["status"] = report.status = 1;
    summary["error"] = "precondition";
    summary["message"] = e.what();
  } catch (const Error& e) {
    summary["status"] = report.status = 1;
    summary["error"] = "invariant";
    summary["message"] = e.what();
  } catch (const std::exception& e) {
    summary["status"] = report.status = 1;
    summary["error"] = "internal";
    summary["message"] = e.what();
  }
  report.summary = summary.dump();
  return report;
}

}  // namespace gs
