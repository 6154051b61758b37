#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "treemax_app/commands.hpp"

int main(int argc, char** argv) {
  using namespace treemax::app;
  CLI::App app{"Weighted branching tree recursions: roots, simulation, tail constants"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides overrides;
  std::uint64_t seed = 0;
  unsigned parallelism = 1;
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "Override run.seed");
  auto* par_opt = app.add_option("--parallelism", parallelism, "Override run.parallelism");
  auto* out_opt = app.add_option("--out", out_dir, "Output (or results) directory");

  std::string config;
  const char* run_commands[] = {"solve-root", "simulate", "tail", "constant", "certify", "symmetry-check",
                                "pipeline"};
  auto* validate = app.add_subcommand("validate", "Check the model hypotheses");
  validate->add_option("--config", config, "Experiment config (YAML)")->required();
  for (const char* name : run_commands) {
    app.add_subcommand(name, std::string("Run the ") + name + " stages")
        ->add_option("--config", config, "Experiment config (YAML)")
        ->required();
  }
  std::string results;
  auto* report = app.add_subcommand("report", "Render report.txt from a results directory");
  report->add_option("results", results, "Results directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (*seed_opt) overrides.seed = seed;
  if (*par_opt) overrides.parallelism = parallelism;
  if (*out_opt) overrides.out = out_dir;

  if (*validate) return cmd_validate(config, overrides, std::cout, std::cerr);
  if (*report) {
    const std::string dir = !results.empty() ? results : overrides.out.value_or("results");
    return cmd_report(dir, std::cout, std::cerr);
  }
  for (const char* name : run_commands) {
    if (app.got_subcommand(name)) return cmd_run(name, config, overrides, std::cout, std::cerr);
  }
  return kConfigError;
}
