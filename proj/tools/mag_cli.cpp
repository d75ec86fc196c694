#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <optional>

#include "mag/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sticky-particle and action-minimization experiments"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out";
  std::optional<std::size_t> grid;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  for (auto kind : {mag::ExperimentKind::Minimize, mag::ExperimentKind::GammaSweep, mag::ExperimentKind::Sticky,
                    mag::ExperimentKind::Heatwave, mag::ExperimentKind::CheckInvariants}) {
    CLI::App* sub = app.add_subcommand(mag::to_string(kind), fmt::format("run the {} experiment", mag::to_string(kind)));
    sub->add_option("--scenario", scenario_path, "scenario file")->required();
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--grid", grid, "grid size M (overrides the scenario)");
    sub->add_option("--seed", seed, "noise seed (overrides the scenario)");
    sub->add_flag("--quiet", quiet, "no console summary");
  }
  CLI11_PARSE(app, argc, argv);
  const auto kind = mag::experiment_kind_from_string(app.get_subcommands().front()->get_name());

  std::optional<mag::Scenario> scenario;
  std::vector<std::string> overrides;
  try {
    scenario = mag::load_scenario(scenario_path);
    if (scenario->experiment != kind) {
      scenario->experiment = kind;
      overrides.push_back("experiment");
    }
    if (grid) {
      scenario->grid = *grid;
      overrides.push_back("grid");
    }
    if (seed) {
      scenario->seed = *seed;
      overrides.push_back("seed");
    }
    mag::Bundle b = mag::run_experiment(*scenario, overrides);
    auto paths = mag::write_outputs(b, out_dir);
    if (!quiet) {
      for (auto& p : paths) fmt::print("wrote {}\n", p.string());
      fmt::print("\n{}", b.files.back().content);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    try {
      mag::write_outputs(mag::failure_bundle(scenario ? &*scenario : nullptr, e.what(), overrides), out_dir);
    } catch (const std::exception& w) {
      std::cerr << "error: could not write failure manifest: " << w.what() << "\n";
    }
    return 1;
  }
}
