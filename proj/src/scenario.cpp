#include "graphstab/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "graphstab/analytic_graphs.hpp"
#include "graphstab/errors.hpp"
#include "graphstab/io.hpp"
#include "graphstab/levelsets.hpp"
#include "graphstab/radial_profile.hpp"

namespace gs {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ParseError("scenario: missing numeric field \"" + key + "\"");
  return j[key].get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ParseError("scenario: field \"" + key + "\" must be a number");
  return j[key].get<double>();
}

std::vector<double> number_list(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array())
    throw ParseError("scenario: missing array field \"" + key + "\"");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number())
      throw ParseError("scenario: array \"" + key + "\" has a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

FamilyKind parse_kind(const std::string& s) {
  if (s == "schwarzschild") return FamilyKind::schwarzschild;
  if (s == "mass-profile") return FamilyKind::mass_profile;
  if (s == "schwarzschild-plus-bump")
    return FamilyKind::schwarzschild_plus_bump;
  if (s == "explicit-rotational") return FamilyKind::explicit_rotational;
  throw ParseError("scenario: unknown family kind \"" + s + "\"");
}

// Solves 2 m(r) = r^(n-2) for the horizon radius of a step aggregate.
double step_horizon_radius(const MassProfile& mp, Dimension dim) {
  const int n = dim.n();
  auto gap = [&](double r) { return std::pow(r, n - 2) - 2.0 * mp.m(r); };
  double lo = 1e-9;
  double hi = 1.0;
  if (gap(lo) >= 0.0)
    throw PreconditionError("step mass aggregate has no horizon radius");
  while (gap(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e12)
      throw PreconditionError("step mass aggregate has no horizon radius");
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RadialPtr explicit_profile(const ProfileSpec& spec) {
  auto param = [&](const std::string& key) {
    auto it = spec.params.find(key);
    if (it == spec.params.end())
      throw ParseError("scenario: profile \"" + spec.name +
                       "\" needs parameter \"" + key + "\"");
    return it->second;
  };
  if (spec.name == "paraboloid") return paraboloid_profile(param("c"));
  if (spec.name == "lower-hemisphere")
    return lower_hemisphere_profile(param("radius"));
  if (spec.name == "gaussian-bump")
    return gaussian_bump_profile(param("amplitude"), param("sigma"));
  throw ParseError("scenario: unknown profile \"" + spec.name + "\"");
}

// Scaled pchip aggregate for one ladder mass: sample masses scale
// linearly, the innermost radius moves onto the horizon of its scaled
// mass, and the outer radii stay put so the asymptotic regime (and any
// shared AsymptoticProfile) is uniform across the family.
RadialPtr pchip_member_profile(const Scenario& sc, double mass) {
  const int n = sc.dim.n();
  std::vector<double> r = sc.sample_r;
  std::vector<double> m = sc.sample_m;
  const double unit = m.back();
  for (double& mi : m) mi *= mass / unit;
  r.front() = std::pow(2.0 * m.front(), 1.0 / (n - 2));
  if (r.size() > 1 && r.front() >= r[1])
    throw PreconditionError(
        "mass-profile member: scaled horizon radius reaches the second "
        "sample; shrink the ladder mass or widen the samples");
  return profile_from_mass(sc.dim, make_pchip_mass(r, m), r.front());
}

RadialPtr step_member_profile(const Scenario& sc, double mass) {
  double total = sc.step_base;
  for (const MassStep& s : sc.steps) total += s.amplitude;
  if (!(total > 0.0))
    throw PreconditionError("step mass aggregate must have positive total");
  const double factor = mass / total;
  std::vector<MassStep> steps = sc.steps;
  for (MassStep& s : steps) s.amplitude *= factor;
  MassPtr mp = make_step_mass(sc.step_base * factor, steps);
  return profile_from_mass(sc.dim, mp, step_horizon_radius(*mp, sc.dim));
}

RadialPtr member_profile(const Scenario& sc, double mass) {
  switch (sc.kind) {
    case FamilyKind::schwarzschild:
    case FamilyKind::schwarzschild_plus_bump:
      return make_schwarzschild_profile(sc.dim, mass);
    case FamilyKind::mass_profile:
      return sc.sample_r.empty() ? step_member_profile(sc, mass)
                                 : pchip_member_profile(sc, mass);
    case FamilyKind::explicit_rotational:
      return explicit_profile(*sc.profile);
  }
  throw PreconditionError("unreachable family kind");
}

}  // namespace

std::string family_kind_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::schwarzschild:
      return "schwarzschild";
    case FamilyKind::mass_profile:
      return "mass-profile";
    case FamilyKind::schwarzschild_plus_bump:
      return "schwarzschild-plus-bump";
    case FamilyKind::explicit_rotational:
      return "explicit-rotational";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario: document must be an object");
  if (!doc.contains("schema") || !doc["schema"].is_number_integer())
    throw ParseError("scenario: missing integer \"schema\" field");
  Scenario sc;
  sc.schema = doc["schema"].get<int>();
  if (sc.schema != 1)
    throw ParseError("scenario: unsupported schema version " +
                     std::to_string(sc.schema));

  const double nd = require_number(doc, "dimension");
  if (nd != std::floor(nd) || nd < 3 || nd > 32)
    throw ParseError("scenario: dimension must be an integer >= 3");
  sc.dim = Dimension(static_cast<int>(nd));

  if (!doc.contains("family") || !doc["family"].is_object())
    throw ParseError("scenario: missing \"family\" object");
  const json& fam = doc["family"];
  if (!fam.contains("kind") || !fam["kind"].is_string())
    throw ParseError("scenario: family needs a string \"kind\"");
  sc.kind = parse_kind(fam["kind"].get<std::string>());

  if (fam.contains("masses"))
    sc.masses = number_list(fam, "masses");
  else if (fam.contains("mass"))
    sc.masses = {require_number(fam, "mass")};
  for (double m : sc.masses)
    if (!(m > 0.0)) throw ParseError("scenario: masses must be positive");

  switch (sc.kind) {
    case FamilyKind::schwarzschild:
      if (sc.masses.empty())
        throw ParseError("scenario: schwarzschild family needs a mass");
      break;
    case FamilyKind::mass_profile: {
      if (sc.masses.empty())
        throw ParseError("scenario: mass-profile family needs a mass");
      const bool has_samples = fam.contains("mass_samples");
      const bool has_steps = fam.contains("mass_steps");
      if (has_samples == has_steps)
        throw ParseError(
            "scenario: mass-profile family needs exactly one of "
            "\"mass_samples\" and \"mass_steps\"");
      if (has_samples) {
        const json& ms = fam["mass_samples"];
        if (!ms.is_object())
          throw ParseError("scenario: \"mass_samples\" must be an object");
        sc.sample_r = number_list(ms, "r");
        sc.sample_m = number_list(ms, "m");
        if (sc.sample_r.size() != sc.sample_m.size() || sc.sample_r.size() < 2)
          throw ParseError(
              "scenario: mass samples need matching r and m arrays with at "
              "least two points");
        if (!std::is_sorted(sc.sample_r.begin(), sc.sample_r.end()) ||
            sc.sample_r.front() <= 0.0)
          throw ParseError("scenario: sample radii must be positive and "
                           "increasing");
        if (!(sc.sample_m.back() > 0.0))
          throw ParseError("scenario: sample masses must end positive");
      } else {
        const json& st = fam["mass_steps"];
        if (!st.is_object() || !st.contains("steps") ||
            !st["steps"].is_array())
          throw ParseError(
              "scenario: \"mass_steps\" needs a \"steps\" array");
        sc.step_base = number_or(st, "base", 0.0);
        for (const auto& s : st["steps"]) {
          MassStep step{require_number(s, "amplitude"),
                        require_number(s, "center"),
                        require_number(s, "width")};
          if (!(step.width > 0.0))
            throw ParseError("scenario: step widths must be positive");
          sc.steps.push_back(step);
        }
        if (sc.steps.empty())
          throw ParseError("scenario: \"mass_steps\" has no steps");
      }
      break;
    }
    case FamilyKind::schwarzschild_plus_bump: {
      if (sc.masses.empty())
        throw ParseError("scenario: bump family needs a mass");
      if (!fam.contains("bump") || !fam["bump"].is_object())
        throw ParseError("scenario: bump family needs a \"bump\" object");
      const json& b = fam["bump"];
      BumpSpec spec;
      spec.center = number_list(b, "center");
      spec.amplitude = require_number(b, "amplitude");
      spec.width = require_number(b, "width");
      if (static_cast<int>(spec.center.size()) != sc.dim.n())
        throw ParseError("scenario: bump center must have one entry per "
                         "dimension");
      if (!(spec.width > 0.0))
        throw ParseError("scenario: bump width must be positive");
      sc.bump = spec;
      break;
    }
    case FamilyKind::explicit_rotational: {
      if (!fam.contains("profile") || !fam["profile"].is_object())
        throw ParseError(
            "scenario: explicit-rotational family needs a \"profile\"");
      const json& p = fam["profile"];
      if (!p.contains("name") || !p["name"].is_string())
        throw ParseError("scenario: profile needs a string \"name\"");
      ProfileSpec spec;
      spec.name = p["name"].get<std::string>();
      for (auto it = p.begin(); it != p.end(); ++it) {
        if (it.key() == "name") continue;
        if (!it.value().is_number())
          throw ParseError("scenario: profile parameter \"" + it.key() +
                           "\" must be a number");
        spec.params[it.key()] = it.value().get<double>();
      }
      sc.profile = spec;
      break;
    }
  }

  if (doc.contains("asymptotics")) {
    const json& a = doc["asymptotics"];
    if (!a.is_object())
      throw ParseError("scenario: \"asymptotics\" must be an object");
    AsymptoticProfile ap;
    ap.r0 = require_number(a, "r0");
    ap.gamma = require_number(a, "gamma");
    ap.decay_exponent = require_number(a, "alpha");
    ap.lambda = number_or(a, "lambda", 0.0);
    if (!(ap.r0 > 0.0) || !(ap.gamma > 0.0))
      throw ParseError("scenario: asymptotics need positive r0 and gamma");
    sc.asymptotics = ap;
  }

  if (doc.contains("study")) {
    const json& st = doc["study"];
    if (!st.is_object())
      throw ParseError("scenario: \"study\" must be an object");
    sc.study.rho = number_or(st, "rho", sc.study.rho);
    double levels = number_or(st, "levels", sc.study.levels);
    if (!(sc.study.rho > 0.0) || levels < 2 || levels != std::floor(levels))
      throw ParseError(
          "scenario: study needs rho > 0 and an integer levels >= 2");
    sc.study.levels = static_cast<int>(levels);
    if (st.contains("with_pairing")) {
      if (!st["with_pairing"].is_boolean())
        throw ParseError("scenario: \"with_pairing\" must be a boolean");
      sc.study.with_pairing = st["with_pairing"].get<bool>();
    }
  }

  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (!t.is_object())
      throw ParseError("scenario: \"tolerances\" must be an object");
    sc.tol = number_or(t, "tol", sc.tol);
  }
  if (!(sc.tol > 0.0)) throw ParseError("scenario: tolerances must be positive");

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<int64_t>() < 0)
      throw ParseError("scenario: \"seed\" must be a nonnegative integer");
    sc.seed = doc["seed"].get<uint64_t>();
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ParseError(std::string("scenario: cannot read file: ") + e.what());
  }
  return parse_scenario(text);
}

GraphPtr build_member(const Scenario& sc, double mass) {
  if (sc.kind == FamilyKind::schwarzschild_plus_bump) {
    const BumpSpec& b = *sc.bump;
    VecN center(sc.dim.n());
    for (int i = 0; i < sc.dim.n(); ++i) center[i] = b.center[i];
    return std::make_shared<BumpedRotationalGraph>(
        sc.dim, member_profile(sc, mass), center, b.amplitude, b.width);
  }
  return make_rotational_graph(sc.dim, member_profile(sc, mass));
}

GraphPtr build_normalized_member(const Scenario& sc, double mass) {
  if (sc.kind == FamilyKind::explicit_rotational ||
      sc.kind == FamilyKind::schwarzschild_plus_bump)
    throw PreconditionError(
        "height normalization needs a mass-parameterized rotational family");
  RadialPtr prof = member_profile(sc, mass);
  const double h0 = h_zero(*make_rotational_graph(sc.dim, prof), mass);
  return make_rotational_graph(sc.dim,
                               std::make_shared<ShiftedRadial>(prof, h0));
}

std::vector<GraphPtr> build_family(const Scenario& sc) {
  std::vector<GraphPtr> out;
  if (sc.kind == FamilyKind::explicit_rotational) {
    out.push_back(build_member(sc, 0.0));
    return out;
  }
  for (double m : sc.masses) out.push_back(build_member(sc, m));
  return out;
}

}  // namespace gs
