#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphstab/comparison.hpp"
#include "graphstab/graph_function.hpp"
#include "graphstab/schwarzschild.hpp"

namespace gs {

// Graph families the front end can build from a scenario file.
enum class FamilyKind {
  schwarzschild,
  mass_profile,
  schwarzschild_plus_bump,
  explicit_rotational,
};

std::string family_kind_name(FamilyKind kind);

struct BumpSpec {
  std::vector<double> center;  // length = dimension
  double amplitude = 0.0;
  double width = 0.0;
};

// Closed-form rotational profile chosen by name; parameters are looked up
// by key so new shapes only touch the factory.
struct ProfileSpec {
  std::string name;
  std::map<std::string, double> params;
};

struct StudySpec {
  double rho = 8.0;        // ball radius for flat-norm runs
  int levels = 33;         // level count for level-set tables
  bool with_pairing = false;
};

// One parsed scenario document. Parsing validates everything that can be
// checked without building graphs; construction-time violations (horizon
// compatibility, decreasing profiles, ...) surface from the builders.
struct Scenario {
  int schema = 1;
  Dimension dim{3};
  FamilyKind kind = FamilyKind::schwarzschild;
  std::vector<double> masses;      // mass ladder; single entry for one graph
  std::vector<double> sample_r;    // pchip mass aggregate, unit-mass shape
  std::vector<double> sample_m;
  double step_base = 0.0;          // alternative aggregate: base + tanh steps
  std::vector<MassStep> steps;
  std::optional<BumpSpec> bump;
  std::optional<ProfileSpec> profile;
  std::optional<AsymptoticProfile> asymptotics;
  StudySpec study;
  double tol = 1e-8;
  uint64_t seed = 1;
};

// Parses and validates a scenario document; all failures are ParseError.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

// Builds the family member of the given mass (ignored by the
// explicit-rotational kind, which has no mass parameter). The graph is in
// raw coordinates: no height normalization is applied.
GraphPtr build_member(const Scenario& sc, double mass);

// Same member shifted so that h_zero sits at height zero, which is what
// the flat-norm study requires. Only rotational kinds support this.
GraphPtr build_normalized_member(const Scenario& sc, double mass);

// All members of the scenario's mass ladder (one graph for the
// explicit-rotational kind).
std::vector<GraphPtr> build_family(const Scenario& sc);

// Options assembled by the command-line front end.
struct RunOptions {
  std::string command;  // verify | mass | levelsets | ode | flatnorm | study
  std::filesystem::path scenario_path;
  std::optional<int> dimension;  // overrides the scenario
  std::optional<double> tol;     // overrides the scenario
  int threads = 1;
  std::filesystem::path output_dir = ".";
  enum class Format { csv, json } format = Format::csv;
};

struct RunReport {
  int status = 0;              // 0 ok, 1 invariant, 2 parse, 3 convergence
  std::string summary;         // one JSON object, machine readable
  std::vector<std::string> artifacts;  // files written, relative to output_dir
};

// Executes one subcommand against a scenario file, writing artifacts into
// output_dir. Library errors are mapped to the documented exit statuses
// and reported in the summary instead of escaping.
RunReport run_scenario(const RunOptions& options);

}  // namespace gs
