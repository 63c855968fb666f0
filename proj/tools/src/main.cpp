#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crossdiff_cli/commands.hpp"
#include "crossdiff_cli/config.hpp"

int main(int argc, char** argv) {
  using namespace crossdiff::cli;

  CLI::App app{"Entropy-stable finite-volume solver for cross-diffusion systems"};
  app.require_subcommand(1);
  app.footer(config_help());

  std::string config;
  bool full_scale = false;
  CheckOptions check;

  auto* run = app.add_subcommand("run", "simulate a config; writes series.csv and snapshot_<step>.csv");
  run->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);

  auto* conv = app.add_subcommand("convergence", "spatial convergence study; writes convergence.csv");
  conv->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
  conv->add_flag("--full-scale", full_scale, "reference 5120 cells, dt = (1/5120)^2, ladder 40..1280");

  auto* decay = app.add_subcommand("decay", "relative-entropy decay study; writes decay.csv and decay_fit.csv");
  decay->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);

  auto* chk = app.add_subcommand("check", "sampled property suite; exit 3 if any check fails");
  chk->add_option("--seed", check.seed, "random seed")->capture_default_str();
  chk->add_option("--samples", check.samples, "samples per check")->capture_default_str();
  chk->add_flag("--perturb-model", check.perturb_model, "negative control with a wrong Maxwell-Stefan matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*run) return cmd_run(config, std::cout, std::cerr);
  if (*conv) return cmd_convergence(config, full_scale, std::cout, std::cerr);
  if (*decay) return cmd_decay(config, std::cout, std::cerr);
  return cmd_check(check, std::cout, std::cerr);
}
