#include <cli11/CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "levylab/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"levylab: seeded experiments on Levy and lacunary wavelet sample paths"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "run";
  int workers = 0;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run a scenario and write its report");
  run->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--workers", workers, "Worker threads (0: LEVYLAB_WORKERS or hardware)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "Override the scenario seed");

  auto* validate = app.add_subcommand("validate", "Parse and check a scenario without running it");
  validate->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);

  app.add_subcommand("list-kinds", "List scenario kinds");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    levylab::RunOptions opts;
    opts.out_dir = out_dir;
    opts.workers = workers;
    opts.seed = seed;
    return levylab::cli_run(config, opts, std::cout, std::cerr);
  }
  if (validate->parsed()) return levylab::cli_validate(config, std::cout, std::cerr);
  return levylab::cli_list_kinds(std::cout);
}
