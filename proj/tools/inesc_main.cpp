// Command-line runner for the Nash seeking simulations and oracles.

#include "inesc/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  namespace cli = inesc::cli;
  CLI::App app{"Integral Nash equilibrium seeking: simulations and oracles"};
  app.require_subcommand(1);

  cli::CommonOptions opts;
  std::string config, baseline_config, parameter;
  std::vector<std::string> values;
  double beta = 1.0;

  auto common = [&](CLI::App* sub, bool sim_flags) {
    sub->add_option("--config", config, "Experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--override", opts.overrides,
                    "Dot-path override key=value (repeatable)");
    if (sim_flags) {
      sub->add_option("--out", opts.out_dir, "Output directory");
      sub->add_option("--step", opts.step, "Integrator step (s)");
      sub->add_option("--horizon", opts.horizon, "Simulated horizon (s)");
      sub->add_option("--seed", opts.seed, "Reserved; runs are deterministic");
      sub->add_option("--window", opts.window, "Trailing metrics window (s)");
    }
  };

  auto* run = app.add_subcommand("run", "Simulate one experiment");
  common(run, true);
  auto* compare = app.add_subcommand(
      "compare", "Run I-NESC and the baseline on the same game");
  common(compare, true);
  compare->add_option("--baseline", baseline_config, "Baseline config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* sweep = app.add_subcommand("sweep", "Vary one parameter over a list");
  common(sweep, true);
  sweep->add_option("--param", parameter, "Dot path, '*' matches all agents")
      ->required();
  sweep->add_option("--values", values, "Values to try")
      ->required()
      ->delimiter(',');
  auto* ne = app.add_subcommand("ne-solve", "Compute the Nash equilibrium");
  common(ne, false);
  auto* mono = app.add_subcommand("check-monotone",
                                  "Strong monotonicity of the pseudo-gradient");
  common(mono, false);
  auto* tau = app.add_subcommand("recommend-tau",
                                 "Full-information time-constant threshold");
  common(tau, false);
  tau->add_option("--beta", beta, "Weight of the plant Lyapunov term");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  return cli::guarded(
      [&]() -> int {
        if (*run) return cli::cmd_run(config, opts, std::cout);
        if (*compare) {
          return cli::cmd_compare(config, baseline_config, opts, std::cout);
        }
        if (*sweep) return cli::cmd_sweep(config, parameter, values, opts, std::cout);
        if (*ne) return cli::cmd_ne_solve(config, opts, std::cout);
        if (*mono) return cli::cmd_check_monotone(config, opts, std::cout);
        return cli::cmd_recommend_tau(config, beta, opts, std::cout);
      },
      std::cerr);
}
