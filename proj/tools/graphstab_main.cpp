#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "graphstab/scenario.hpp"

// Scenario-driven front end. Every subcommand takes a scenario file, runs
// one suite against it, writes its tables into the output directory and
// prints a single-line JSON summary to stdout. Exit status: 0 all checks
// pass, 1 invariant or precondition failure, 2 parse/usage error, 3
// numerical non-convergence.
int main(int argc, char** argv) {
  CLI::App app{"graphstab: graphical hypersurface stability toolkit"};
  app.require_subcommand(1);

  gs::RunOptions opt;
  std::string format = "csv";
  int dimension = 0;
  double tol = 0.0;

  for (const char* name :
       {"verify", "mass", "levelsets", "ode", "flatnorm", "study"}) {
    CLI::App* sub = app.add_subcommand(
        name, std::string("run the ") + name + " suite on a scenario");
    sub->add_option("scenario", opt.scenario_path, "scenario JSON file")
        ->required();
    sub->add_option("--dimension", dimension,
                    "override the scenario dimension");
    sub->add_option("--tol", tol, "override the scenario tolerance");
    sub->add_option("--threads", opt.threads, "worker thread count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output-dir", opt.output_dir, "artifact directory")
        ->envname("GRAPHSTAB_OUTPUT_DIR");
    sub->add_option("--format", format, "table format")
        ->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    std::printf("{\"status\":2,\"error\":\"usage\",\"message\":\"%s\"}\n",
                e.get_name().c_str());
    return 2;
  }

  opt.command = app.get_subcommands().front()->get_name();
  if (dimension != 0) opt.dimension = dimension;
  if (tol != 0.0) opt.tol = tol;
  opt.format = format == "json" ? gs::RunOptions::Format::json
                                : gs::RunOptions::Format::csv;

  const gs::RunReport report = gs::run_scenario(opt);
  std::printf("%s\n", report.summary.c_str());
  return report.status;
}
