// Experiment driver: stalling demonstrations, restart comparisons, Monte
// Carlo summaries, probability-bound tables, the neutrino classification
// benchmark, and a fast invariant selfcheck. Every command is fully
// determined by its flags plus the master seed and emits self-describing CSV.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rsgd/experiments.hpp"

namespace {

void add_common_options(CLI::App* cmd, rsgd::ExperimentConfig& config) {
  cmd->add_option("--d", config.d, "Problem dimension");
  cmd->add_option("--noise-halfwidth", config.noise_halfwidth,
                  "Noise half-width b; eps ~ Uniform(-b, b)");
  cmd->add_option("--beta-norm", config.beta_norm, "Norm of the true parameter (theta0 = 0)");
  cmd->add_flag("--identity-design", config.identity_design, "Use Q = I instead of a rotation");
  cmd->add_option("--exponents", config.exponents, "Power-law exponents p");
  cmd->add_option("--observations", config.observations, "Observations per run");
  cmd->add_option("--runs", config.runs, "Independent runs per configuration");
  cmd->add_option("--delta", config.delta, "Error radius for bounds and success fractions");
  cmd->add_option("--seed", config.seed, "Master seed");
  cmd->add_option("--first-trigger", config.first_trigger, "First restart trigger iteration");
  cmd->add_option("--growth-factor", config.growth_factor, "Trigger growth factor");
  cmd->add_option("--record-every", config.record_every, "Snapshot cadence in iterations");
  cmd->add_option("--threads", config.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--out", config.out_dir, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic gradient experiments: stalling and restarts"};
  app.require_subcommand(1);
  // key=value config file; keys live under a [subcommand] section, e.g.
  //   [stall]
  //   observations=1000000
  // Command-line flags override file values.
  app.set_config("--config", "", "Read options from a key=value file (see README)");

  rsgd::ExperimentConfig stall_config;
  CLI::App* stall = app.add_subcommand("stall", "SGD trajectories on a shared stream");
  add_common_options(stall, stall_config);

  rsgd::ExperimentConfig restart_config;
  CLI::App* restart =
      app.add_subcommand("restart", "Restarted-SGD trajectories on the shared stream");
  add_common_options(restart, restart_config);

  rsgd::ExperimentConfig mc_config;
  CLI::App* montecarlo =
      app.add_subcommand("montecarlo", "Error statistics over independent runs, plus OLS");
  add_common_options(montecarlo, mc_config);

  rsgd::ExperimentConfig bounds_config;
  bounds_config.d = 100;
  bounds_config.beta_norm = 560.0;
  bounds_config.delta = 0.1;
  CLI::App* bounds = app.add_subcommand("bounds", "Probability lower-bound tables");
  add_common_options(bounds, bounds_config);
  bounds->add_option("--bound-observations", bounds_config.bound_observations,
                     "Observation counts for the bound grid");

  rsgd::ExperimentConfig neutrino_config;
  CLI::App* neutrino =
      app.add_subcommand("neutrino", "Train the 61-parameter classifier five ways");
  add_common_options(neutrino, neutrino_config);
  neutrino->add_option("--dataset", neutrino_config.dataset_path,
                       "Path to MiniBooNE_PID.txt (UCI repository)");
  neutrino->add_flag("--synthetic", neutrino_config.synthetic,
                     "Use the seeded synthetic stand-in dataset");
  neutrino->add_option("--synthetic-signal", neutrino_config.synthetic_signal,
                       "Synthetic signal examples");
  neutrino->add_option("--synthetic-background", neutrino_config.synthetic_background,
                       "Synthetic background examples");
  neutrino->add_option("--epochs", neutrino_config.epochs, "Passes over the training set");
  neutrino->add_option("--train-fraction", neutrino_config.train_fraction,
                       "Training-set fraction");
  neutrino->add_option("--sgd-exponent", neutrino_config.sgd_exponent, "SGD power-law exponent");
  neutrino->add_option("--eta", neutrino_config.adagrad_eta, "AdaGrad multiplicative factor");
  neutrino->add_option("--bfgs-max-iters", neutrino_config.bfgs.max_iters, "BFGS iteration cap");

  rsgd::SelfCheckOptions selfcheck_options;
  CLI::App* selfcheck = app.add_subcommand("selfcheck", "Run the fast invariant suite");
  selfcheck->add_option("--seed", selfcheck_options.seed, "Master seed for the report");
  selfcheck->add_option("--runs", selfcheck_options.montecarlo_runs,
                        "Monte Carlo runs per statistical check");
  selfcheck->add_flag("--corrupt-gradient", selfcheck_options.corrupt_gradient,
                      "Test hook: corrupt the gradient and expect a failure");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stall->parsed()) rsgd::cmd_stall(stall_config);
    if (restart->parsed()) rsgd::cmd_restart(restart_config);
    if (montecarlo->parsed()) rsgd::cmd_montecarlo(mc_config);
    if (bounds->parsed()) rsgd::cmd_bounds(bounds_config);
    if (neutrino->parsed()) rsgd::cmd_neutrino(neutrino_config);
    if (selfcheck->parsed()) {
      const rsgd::SelfCheckReport report = rsgd::run_selfcheck(selfcheck_options);
      std::cout << rsgd::format_selfcheck_report(report);
      return report.all_passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
