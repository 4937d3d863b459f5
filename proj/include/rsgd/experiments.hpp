#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsgd/bfgs.hpp"
#include "rsgd/bounds.hpp"
#include "rsgd/csv.hpp"
#include "rsgd/dataset.hpp"
#include "rsgd/ideal_problem.hpp"
#include "rsgd/neural_net.hpp"
#include "rsgd/parallel.hpp"
#include "rsgd/reference.hpp"
#include "rsgd/restart.hpp"
#include "rsgd/runner.hpp"
#include "rsgd/statistics.hpp"
#include "rsgd/steppers.hpp"
#include "rsgd/trajectory_io.hpp"

namespace rsgd {

/**
 * One record fully determines every experiment: all randomness is derived
 * from (seed, run index), so reruns are reproducible and parallel execution
 * cannot change any output byte.
 *
 * The defaults are desk scale (d = 10, 10^6 observations, 100 runs) so the
 * full sweep finishes in minutes; the larger scales (d = 100, 10^8..10^10
 * observations) stay reachable through the same fields.
 */
struct ExperimentConfig {
  // Ideal-problem instance; theta0 = 0 throughout, so the initial distance
  // to the true parameter equals beta_norm.
  int d = 10;
  double noise_halfwidth = 5.0;
  double beta_norm = 20.0;
  bool identity_design = false;

  std::vector<double> exponents = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5};
  std::int64_t observations = 1'000'000;
  int runs = 100;
  double delta = 0.1;
  std::uint64_t seed = 12345;

  std::int64_t first_trigger = 100;
  double growth_factor = 1.56;

  std::int64_t record_every = 5000;
  int threads = 0;  ///< 0 = hardware concurrency
  std::string out_dir = "out";

  // bounds command
  std::vector<std::int64_t> bound_observations = {100, 10'000, 1'000'000, 100'000'000,
                                                  10'000'000'000};

  // neutrino command
  std::string dataset_path;
  bool synthetic = false;
  std::int64_t synthetic_signal = 1400;
  std::int64_t synthetic_background = 3600;
  int epochs = 30;
  double train_fraction = 0.7;
  double sgd_exponent = 0.7;
  double adagrad_eta = 0.001;
  BFGSConfig bfgs;

  double init_dist_sq() const { return beta_norm * beta_norm; }

  void write_comments(CsvWriter& csv) const {
    csv.comment("d", static_cast<std::int64_t>(d));
    csv.comment("noise_halfwidth", noise_halfwidth);
    csv.comment("beta_norm", beta_norm);
    csv.comment("identity_design", static_cast<std::int64_t>(identity_design ? 1 : 0));
    std::ostringstream exps;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
      if (i) exps << ' ';
      exps << format_double(exponents[i]);
    }
    csv.comment("exponents", exps.str());
    csv.comment("observations", observations);
    csv.comment("runs", static_cast<std::int64_t>(runs));
    csv.comment("delta", delta);
    csv.comment("seed", std::to_string(seed));
    csv.comment("first_trigger", first_trigger);
    csv.comment("growth_factor", growth_factor);
    csv.comment("record_every", record_every);
    csv.comment("train_fraction", train_fraction);
    csv.comment("sgd_exponent", sgd_exponent);
    csv.comment("adagrad_eta", adagrad_eta);
    csv.comment("epochs", static_cast<std::int64_t>(epochs));
    csv.comment("dataset", dataset_path.empty() ? std::string("(none)") : dataset_path);
    csv.comment("synthetic", static_cast<std::int64_t>(synthetic ? 1 : 0));
    csv.comment("synthetic_signal", synthetic_signal);
    csv.comment("synthetic_background", synthetic_background);
    csv.comment("bfgs_alpha0", bfgs.alpha0);
    csv.comment("bfgs_backtrack_rho", bfgs.backtrack_rho);
    csv.comment("bfgs_armijo_c", bfgs.armijo_c);
    csv.comment("bfgs_grad_tol", bfgs.grad_tol);
    csv.comment("bfgs_max_iters", static_cast<std::int64_t>(bfgs.max_iters));
  }
};

namespace detail {

/// Stream-id bases per purpose; run r uses derive(seed, base + r).
constexpr std::uint64_t kSharedStreamId = 0;      // stall / restart shared stream
constexpr std::uint64_t kMonteCarloBase = 1'000;  // per-run streams

inline std::string exponent_tag(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", p);
  return std::string(buf);
}

inline std::vector<std::int64_t> geometric_checkpoints(std::int64_t n, double ratio = 1.3) {
  std::vector<std::int64_t> ks;
  std::int64_t k = 1;
  while (k < n) {
    ks.push_back(k);
    k = std::max(k + 1, static_cast<std::int64_t>(static_cast<double>(k) * ratio));
  }
  ks.push_back(n);
  return ks;
}

}  // namespace detail

/// A single SGD run on the ideal problem with l2 errors captured at the
/// requested iterations (sorted; the final step is always captured).
struct IdealRunOutput {
  std::vector<std::int64_t> ks;
  std::vector<double> l2_errors;
  Eigen::VectorXd final_theta;
  std::uint64_t stream_checksum = 0;
  std::vector<std::int64_t> triggers;
};

inline IdealRunOutput run_ideal_sgd(const IdealProblemSpec& spec, const Schedule& schedule,
                                    const std::optional<RestartPolicy>& policy, RngStream stream,
                                    std::int64_t n_steps,
                                    const std::vector<std::int64_t>& checkpoints) {
  IdealGradientOracle oracle(spec, stream);
  SgdStepper stepper;
  RunOptions options;
  options.n_steps = n_steps;
  options.checkpoints = checkpoints;
  options.restarts = policy;
  const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(spec.d);
  RunResult run = run_optimizer(oracle, stepper, schedule, options, theta0);

  IdealRunOutput out;
  out.final_theta = run.theta;
  out.stream_checksum = oracle.stream_checksum();
  out.triggers = run.restart_iterations;
  out.ks.reserve(run.trajectory.size());
  out.l2_errors.reserve(run.trajectory.size());
  for (const auto& pt : run.trajectory) {
    out.ks.push_back(pt.k);
    out.l2_errors.push_back((pt.theta - spec.beta_star).norm());
  }
  return out;
}

// ---------------------------------------------------------------------------
// stall / restart commands
// ---------------------------------------------------------------------------

struct StallRun {
  double exponent = 0.0;
  bool restarted = false;
  std::vector<std::int64_t> ks;
  std::vector<double> l2_errors;
  std::uint64_t stream_checksum = 0;
  std::vector<std::int64_t> triggers;
};

/// One trajectory per exponent, every exponent consuming the identical
/// observation stream (same derived seed), theta0 = 0.
inline std::vector<StallRun> run_stall(const ExperimentConfig& config, bool restarted) {
  const IdealProblemSpec spec = generate_problem(config.d, config.noise_halfwidth,
                                                 config.beta_norm, config.seed,
                                                 config.identity_design);
  const auto checkpoints = detail::geometric_checkpoints(config.observations);
  std::optional<RestartPolicy> policy;
  if (restarted) policy.emplace(config.first_trigger, config.growth_factor);

  std::vector<StallRun> runs(config.exponents.size());
  parallel_for_index(static_cast<std::int64_t>(config.exponents.size()), config.threads,
                     [&](std::int64_t i) {
                       const double p = config.exponents[static_cast<std::size_t>(i)];
                       const Schedule schedule = Schedule::power_law(p);
                       const RngStream stream =
                           RngStream::derive(config.seed, detail::kSharedStreamId);
                       IdealRunOutput out = run_ideal_sgd(spec, schedule, policy, stream,
                                                          config.observations, checkpoints);
                       StallRun& r = runs[static_cast<std::size_t>(i)];
                       r.exponent = p;
                       r.restarted = restarted;
                       r.ks = std::move(out.ks);
                       r.l2_errors = std::move(out.l2_errors);
                       r.stream_checksum = out.stream_checksum;
                       r.triggers = std::move(out.triggers);
                     });
  return runs;
}

inline void write_stall_csv(const ExperimentConfig& config, const StallRun& run,
                            const std::string& path) {
  CsvWriter csv(path);
  csv.comment("command", run.restarted ? std::string("restart") : std::string("stall"));
  csv.comment("exponent", run.exponent);
  config.write_comments(csv);
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(run.stream_checksum));
    csv.comment("stream_checksum", std::string(buf));
  }
  if (run.restarted) {
    std::ostringstream triggers;
    for (std::size_t i = 0; i < run.triggers.size(); ++i) {
      if (i) triggers << ' ';
      triggers << run.triggers[i];
    }
    csv.comment("triggers", triggers.str());
  }
  csv.header({"k", "l2_error", "log10_l2_error"});
  for (std::size_t i = 0; i < run.ks.size(); ++i) {
    csv.row({CsvWriter::cell(run.ks[i]), CsvWriter::cell(run.l2_errors[i]),
             CsvWriter::cell(std::log10(run.l2_errors[i]))});
  }
}

namespace detail {

/// Auditable instance record next to every ideal-problem output.
inline void save_config_problem(const ExperimentConfig& config) {
  save_problem(generate_problem(config.d, config.noise_halfwidth, config.beta_norm, config.seed,
                                config.identity_design),
               config.out_dir + "/problem.txt");
}

}  // namespace detail

inline void cmd_stall(const ExperimentConfig& config, bool restarted = false) {
  std::filesystem::create_directories(config.out_dir);
  detail::save_config_problem(config);
  const auto runs = run_stall(config, restarted);
  const std::string prefix = restarted ? "restart" : "stall";
  for (const auto& run : runs) {
    write_stall_csv(config, run,
                    config.out_dir + "/" + prefix + "_p" + detail::exponent_tag(run.exponent) +
                        ".csv");
  }
}

inline void cmd_restart(const ExperimentConfig& config) { cmd_stall(config, true); }

// ---------------------------------------------------------------------------
// montecarlo command
// ---------------------------------------------------------------------------

struct MonteCarloRow {
  std::string method;  ///< "ols", "sgd" or "restarted_sgd"
  double exponent = 0.0;
  bool has_exponent = false;
  RunStatistics stats;
  double bound = 0.0;  ///< probability lower bound at the run horizon
  bool has_bound = false;
};

/**
 * Error statistics for OLS, standard SGD, and restarted SGD over independent
 * runs. Run r of every method consumes the identical derived stream, so
 * differences between methods are attributable to the method alone.
 * Aggregation is performed in run-index order regardless of scheduling.
 */
inline std::vector<MonteCarloRow> run_montecarlo(const ExperimentConfig& config) {
  if (config.runs < 2) throw std::invalid_argument("run_montecarlo: needs runs >= 2");
  const IdealProblemSpec spec = generate_problem(config.d, config.noise_halfwidth,
                                                 config.beta_norm, config.seed,
                                                 config.identity_design);
  std::vector<MonteCarloRow> rows;

  {  // OLS baseline
    std::vector<double> errors(static_cast<std::size_t>(config.runs));
    parallel_for_index(config.runs, config.threads, [&](std::int64_t r) {
      RngStream stream =
          RngStream::derive(config.seed, detail::kMonteCarloBase + static_cast<std::uint64_t>(r));
      StreamingOls ols(spec.d);
      for (std::int64_t i = 0; i < config.observations; ++i) {
        ols.add(spec, sample_observation(spec, stream));
      }
      const auto solution = ols.solve();
      if (solution.status != StreamingOls::Status::ok) {
        throw std::runtime_error("run_montecarlo: OLS accumulator is rank deficient");
      }
      errors[static_cast<std::size_t>(r)] = (solution.beta - spec.beta_star).norm();
    });
    MonteCarloRow row;
    row.method = "ols";
    row.stats = summarize_errors(errors, config.delta);
    rows.push_back(row);
  }

  for (const bool restarted : {false, true}) {
    for (const double p : config.exponents) {
      const Schedule schedule = Schedule::power_law(p);
      std::optional<RestartPolicy> policy;
      if (restarted) policy.emplace(config.first_trigger, config.growth_factor);
      std::vector<double> errors(static_cast<std::size_t>(config.runs));
      parallel_for_index(config.runs, config.threads, [&](std::int64_t r) {
        RngStream stream = RngStream::derive(
            config.seed, detail::kMonteCarloBase + static_cast<std::uint64_t>(r));
        IdealRunOutput out =
            run_ideal_sgd(spec, schedule, policy, stream, config.observations, {});
        errors[static_cast<std::size_t>(r)] = out.l2_errors.back();
      });
      MonteCarloRow row;
      row.method = restarted ? "restarted_sgd" : "sgd";
      row.exponent = p;
      row.has_exponent = true;
      row.stats = summarize_errors(errors, config.delta);
      if (!restarted) {
        row.bound = prob_lower_bound_ideal_after_steps(spec, schedule, config.init_dist_sq(),
                                                       config.delta, config.observations)
                        .value;
        row.has_bound = true;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline void cmd_montecarlo(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  detail::save_config_problem(config);
  const auto rows = run_montecarlo(config);
  CsvWriter csv(config.out_dir + "/montecarlo.csv");
  csv.comment("command", std::string("montecarlo"));
  config.write_comments(csv);
  csv.header({"method", "p", "mean", "median", "variance", "max", "min", "fraction_below_delta",
              "prob_lower_bound"});
  for (const auto& row : rows) {
    csv.row({row.method, row.has_exponent ? CsvWriter::cell(row.exponent) : std::string(),
             CsvWriter::cell(row.stats.mean), CsvWriter::cell(row.stats.median),
             CsvWriter::cell(row.stats.variance), CsvWriter::cell(row.stats.max),
             CsvWriter::cell(row.stats.min), CsvWriter::cell(row.stats.fraction_below_delta),
             row.has_bound ? CsvWriter::cell(row.bound) : std::string()});
  }
}

// ---------------------------------------------------------------------------
// bounds command
// ---------------------------------------------------------------------------

struct BoundsCell {
  std::int64_t observations = 0;
  double exponent = 0.0;
  double raw = 0.0;
  double value = 0.0;
};

/// Probability-lower-bound grid over (observations x exponent), theta0 = 0,
/// initial distance beta_norm. Nonzero entries are contingent on the initial
/// distance, which is why every output records the init_dist_sq it used.
inline std::vector<BoundsCell> run_bounds(const ExperimentConfig& config) {
  const IdealProblemSpec spec = generate_problem(config.d, config.noise_halfwidth,
                                                 config.beta_norm, config.seed,
                                                 config.identity_design);
  std::vector<BoundsCell> cells;
  for (const std::int64_t n : config.bound_observations) {
    for (const double p : config.exponents) {
      const Schedule schedule = Schedule::power_law(p);
      const BoundValue bound = prob_lower_bound_ideal_after_steps(
          spec, schedule, config.init_dist_sq(), config.delta, n);
      cells.push_back({n, p, bound.raw, bound.value});
    }
  }
  return cells;
}

inline void cmd_bounds(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  detail::save_config_problem(config);
  const auto cells = run_bounds(config);
  {
    CsvWriter csv(config.out_dir + "/bounds.csv");
    csv.comment("command", std::string("bounds"));
    config.write_comments(csv);
    csv.comment("init_dist_sq", config.init_dist_sq());
    csv.comment_line("theta0 = 0; nonzero probabilities are contingent on init_dist_sq");
    csv.header({"observations", "p", "raw_bound", "bound"});
    for (const auto& cell : cells) {
      csv.row({CsvWriter::cell(cell.observations), CsvWriter::cell(cell.exponent),
               CsvWriter::cell(cell.raw), CsvWriter::cell(cell.value)});
    }
  }
  const IdealProblemSpec spec = generate_problem(config.d, config.noise_halfwidth,
                                                 config.beta_norm, config.seed,
                                                 config.identity_design);
  for (const double p : config.exponents) {
    std::vector<std::int64_t> observations = config.bound_observations;
    std::sort(observations.begin(), observations.end());
    if (observations.empty()) continue;
    const BoundSeries series = compute_bound_series(spec, Schedule::power_law(p),
                                                    config.init_dist_sq(), config.delta,
                                                    observations);
    CsvWriter csv(config.out_dir + "/bounds_series_p" + detail::exponent_tag(p) + ".csv");
    csv.comment("command", std::string("bounds"));
    csv.comment("exponent", p);
    config.write_comments(csv);
    csv.comment("init_dist_sq", config.init_dist_sq());
    write_bound_series_csv(series, csv);
  }
}

// ---------------------------------------------------------------------------
// neutrino command
// ---------------------------------------------------------------------------

/// Cyclic single-example oracle over a training set.
class DatasetGradientOracle {
 public:
  explicit DatasetGradientOracle(const ExampleSet& data) : data_(&data) {}

  Eigen::Index dimension() const { return net::kParams; }

  void gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& out) {
    detail::backprop_impl(theta, data_->feature_row(pos_),
                          static_cast<double>(data_->labels[static_cast<std::size_t>(pos_)]),
                          out.data());
    pos_ = (pos_ + 1) % data_->size();
  }

 private:
  const ExampleSet* data_;
  std::int64_t pos_ = 0;
};

struct MethodOutcome {
  std::string name;
  std::vector<std::int64_t> snapshot_ks;
  std::vector<DatasetMetrics> train_metrics;  ///< loss metrics per snapshot
  std::vector<DatasetMetrics> test_metrics;
  std::vector<TrajectoryPoint> snapshots;
  double final_total_gradient_norm = 0.0;
  std::vector<std::int64_t> triggers;
};

struct NeutrinoResult {
  bool synthetic = false;
  std::int64_t n_train = 0;
  std::int64_t n_test = 0;
  std::int64_t iterations = 0;
  SplitDataset split;
  std::vector<MethodOutcome> methods;
};

/**
 * Trains the 61-parameter network with SGD, restarted SGD, AdaGrad, restarted
 * AdaGrad (single-example steps, epochs passes over the shuffled training
 * set) and BFGS on the total objective. All methods start from the same
 * seeded initialization. Stochastic methods record the parameter every
 * record_every iterations and at the last iteration; BFGS records every
 * iteration. Training and testing error are computed for each recorded
 * parameter and the total gradient for the final one.
 */
inline NeutrinoResult run_neutrino(const ExperimentConfig& config) {
  RawDataset raw;
  NeutrinoResult result;
  if (config.synthetic) {
    raw = synthetic_fallback(config.seed, config.synthetic_signal, config.synthetic_background);
    result.synthetic = true;
  } else {
    if (config.dataset_path.empty()) {
      throw std::runtime_error(
          "neutrino: no dataset given. Pass --dataset <path to MiniBooNE_PID.txt> (UCI "
          "repository, \"MiniBooNE particle identification\") or --synthetic.");
    }
    raw = load_raw(config.dataset_path);
  }
  result.split = label_and_split(raw, config.seed, config.train_fraction);
  const SplitDataset& split = result.split;
  result.n_train = split.train.size();
  result.n_test = split.test.size();
  result.iterations = static_cast<std::int64_t>(config.epochs) * split.train.size();

  const Eigen::VectorXd theta0 = init_net_params(config.seed);
  const Schedule schedule = Schedule::power_law(config.sgd_exponent);

  const auto evaluate_snapshots = [&](MethodOutcome& outcome) {
    for (const auto& pt : outcome.snapshots) {
      outcome.snapshot_ks.push_back(pt.k);
      outcome.train_metrics.push_back(dataset_loss_metrics(pt.theta, split.train));
      outcome.test_metrics.push_back(dataset_loss_metrics(pt.theta, split.test));
    }
    outcome.final_total_gradient_norm =
        dataset_mean_gradient(outcome.snapshots.back().theta, split.train).norm();
  };

  const auto run_stochastic = [&](const std::string& name, bool adagrad, bool restarted) {
    MethodOutcome outcome;
    outcome.name = name;
    DatasetGradientOracle oracle(split.train);
    RunOptions options;
    options.n_steps = result.iterations;
    options.record_every = config.record_every;
    if (restarted) options.restarts.emplace(config.first_trigger, config.growth_factor);
    RunResult run = [&] {
      if (adagrad) {
        AdaGradStepper stepper(net::kParams, config.adagrad_eta);
        return run_optimizer(oracle, stepper, schedule, options, theta0);
      }
      SgdStepper stepper;
      return run_optimizer(oracle, stepper, schedule, options, theta0);
    }();
    outcome.snapshots = std::move(run.trajectory);
    outcome.triggers = std::move(run.restart_iterations);
    evaluate_snapshots(outcome);
    result.methods.push_back(std::move(outcome));
  };

  run_stochastic("sgd", false, false);
  run_stochastic("restarted_sgd", false, true);
  run_stochastic("adagrad", true, false);
  run_stochastic("restarted_adagrad", true, true);

  {
    MethodOutcome outcome;
    outcome.name = "bfgs";
    const auto objective = [&](const Eigen::VectorXd& theta) {
      return dataset_loss_metrics(theta, split.train).mean_loss;
    };
    const auto gradient = [&](const Eigen::VectorXd& theta) {
      return dataset_mean_gradient(theta, split.train);
    };
    BfgsResult bfgs = bfgs_minimize(objective, gradient, theta0, config.bfgs);
    outcome.snapshots = std::move(bfgs.trajectory);
    if (outcome.snapshots.empty()) outcome.snapshots.push_back({0, bfgs.theta});
    evaluate_snapshots(outcome);
    result.methods.push_back(std::move(outcome));
  }
  return result;
}

inline void cmd_neutrino(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  const NeutrinoResult result = run_neutrino(config);
  persist_split(result.split, config.out_dir + "/split.txt");
  for (const auto& method : result.methods) {
    {
      CsvWriter csv(config.out_dir + "/neutrino_" + method.name + "_metrics.csv");
      csv.comment("command", std::string("neutrino"));
      csv.comment("method", method.name);
      csv.comment("data", result.synthetic ? std::string("synthetic") : std::string("real"));
      csv.comment("n_train", result.n_train);
      csv.comment("n_test", result.n_test);
      csv.comment("iterations", result.iterations);
      config.write_comments(csv);
      csv.header({"k", "train_mean_loss", "train_misclassification", "test_mean_loss",
                  "test_misclassification"});
      for (std::size_t i = 0; i < method.snapshot_ks.size(); ++i) {
        csv.row({CsvWriter::cell(method.snapshot_ks[i]),
                 CsvWriter::cell(method.train_metrics[i].mean_loss),
                 CsvWriter::cell(method.train_metrics[i].misclassification_rate),
                 CsvWriter::cell(method.test_metrics[i].mean_loss),
                 CsvWriter::cell(method.test_metrics[i].misclassification_rate)});
      }
    }
    {
      CsvWriter csv(config.out_dir + "/neutrino_" + method.name + "_params.csv");
      csv.comment("command", std::string("neutrino"));
      csv.comment("method", method.name);
      write_trajectory_csv(method.snapshots, net::kParams, csv);
    }
  }
  CsvWriter csv(config.out_dir + "/neutrino_total_gradients.csv");
  csv.comment("command", std::string("neutrino"));
  csv.comment("data", result.synthetic ? std::string("synthetic") : std::string("real"));
  config.write_comments(csv);
  csv.header({"method", "total_gradient_norm"});
  for (const auto& method : result.methods) {
    csv.row({method.name, CsvWriter::cell(method.final_total_gradient_norm)});
  }
}

// ---------------------------------------------------------------------------
// selfcheck command
// ---------------------------------------------------------------------------

struct SelfCheckOptions {
  std::uint64_t seed = 12345;
  bool corrupt_gradient = false;  ///< test hook: perturb backprop output
  int gradient_draws = 50;
  int montecarlo_runs = 300;
};

struct SelfCheckItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfCheckReport {
  std::vector<SelfCheckItem> items;
  bool all_passed() const {
    for (const auto& item : items) {
      if (!item.passed) return false;
    }
    return true;
  }
};

inline SelfCheckReport run_selfcheck(const SelfCheckOptions& options = {}) {
  SelfCheckReport report;

  {  // backprop gradient against central finite differences
    RngStream stream = RngStream::derive(options.seed, 0x5E1F);
    double worst = 0.0;
    for (int draw = 0; draw < options.gradient_draws; ++draw) {
      Eigen::VectorXd params(net::kParams);
      for (int i = 0; i < net::kParams; ++i) params(i) = stream.uniform(-1.0, 1.0);
      LabeledExample example;
      example.features.resize(net::kFeatures);
      for (int i = 0; i < net::kFeatures; ++i) example.features(i) = stream.uniform(-2.0, 2.0);
      example.label = stream.next_double() < 0.5 ? 0 : 1;

      Eigen::VectorXd grad = backprop_grad(params, example);
      if (options.corrupt_gradient) grad(7) += 1e-3;
      const double h = 1e-6;
      const double scale = std::max(grad.cwiseAbs().maxCoeff(), 1e-8);
      for (int i = 0; i < net::kParams; ++i) {
        Eigen::VectorXd plus = params, minus = params;
        plus(i) += h;
        minus(i) -= h;
        const double fd = (loss(plus, example) - loss(minus, example)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - grad(i)) / scale);
      }
    }
    report.items.push_back({"gradient-check", worst < 1e-5,
                            "max relative component error " + format_double(worst)});
  }

  {  // A_k recurrence against the literal double sum
    double worst = 0.0;
    for (const double p : {0.5, 0.7, 1.0}) {
      const Schedule schedule = Schedule::power_law(p);
      for (const DecayModel& model : {DecayModel::ideal(10.0), DecayModel::general(1.0, 2.0)}) {
        const auto series = a_k_series(schedule, model, 25);
        for (std::int64_t k = 0; k <= 25; ++k) {
          const double direct = reference::a_k_double_sum(schedule, model, k);
          const double rel = std::abs(series[static_cast<std::size_t>(k)] - direct) /
                             std::max(1.0, std::abs(direct));
          worst = std::max(worst, rel);
        }
      }
    }
    report.items.push_back(
        {"a-k-recurrence", worst < 1e-12, "max deviation from double sum " + format_double(worst)});
  }

  const IdealProblemSpec spec = generate_problem(10, 5.0, 1.0, options.seed);
  const Schedule schedule = Schedule::power_law(0.7);

  {  // exact expected-error formula against a small Monte Carlo
    const std::int64_t n_steps = 1000;
    const int runs = options.montecarlo_runs;
    std::vector<double> gaps(static_cast<std::size_t>(runs));
    parallel_for_index(runs, 0, [&](std::int64_t r) {
      RngStream stream = RngStream::derive(options.seed, 0xE44 + static_cast<std::uint64_t>(r));
      IdealRunOutput out = run_ideal_sgd(spec, schedule, std::nullopt, stream, n_steps, {});
      const double err = out.l2_errors.back();
      gaps[static_cast<std::size_t>(r)] = err * err / spec.d;
    });
    double mean = 0.0;
    for (const double g : gaps) mean += g;
    mean /= static_cast<double>(runs);
    double var = 0.0;
    for (const double g : gaps) var += (g - mean) * (g - mean);
    var /= static_cast<double>(runs - 1);
    const double se = std::sqrt(var / static_cast<double>(runs));
    const double predicted =
        expected_risk_gap_after_steps(spec, schedule, 1.0 / spec.d, n_steps);
    const bool ok = std::abs(mean - predicted) <= 4.0 * se;
    report.items.push_back({"expected-error-exactness", ok,
                            "empirical " + format_double(mean) + " vs formula " +
                                format_double(predicted) + " (4se = " + format_double(4 * se) +
                                ")"});
  }

  {  // probability lower bound against empirical frequency (horizon chosen so
     // the bound is strictly positive and the check is not vacuous)
    const std::int64_t n_steps = 100'000;
    const double delta = 0.3;
    const int runs = options.montecarlo_runs;
    const Schedule schedule06 = Schedule::power_law(0.6);
    std::vector<int> below(static_cast<std::size_t>(runs));
    parallel_for_index(runs, 0, [&](std::int64_t r) {
      RngStream stream = RngStream::derive(options.seed, 0xB0D + static_cast<std::uint64_t>(r));
      IdealRunOutput out = run_ideal_sgd(spec, schedule06, std::nullopt, stream, n_steps, {});
      below[static_cast<std::size_t>(r)] = out.l2_errors.back() <= delta ? 1 : 0;
    });
    double freq = 0.0;
    for (const int b : below) freq += b;
    freq /= static_cast<double>(runs);
    const double bound =
        prob_lower_bound_ideal_after_steps(spec, schedule06, 1.0, delta, n_steps).value;
    const double slack = 4.0 * std::sqrt(0.25 / static_cast<double>(runs));
    const bool ok = freq >= bound - slack;
    report.items.push_back({"bound-validity", ok,
                            "frequency " + format_double(freq) + " vs bound " +
                                format_double(bound) + " - slack " + format_double(slack)});
  }

  return report;
}

inline std::string format_selfcheck_report(const SelfCheckReport& report) {
  std::ostringstream out;
  for (const auto& item : report.items) {
    out << (item.passed ? "[ok]   " : "[FAIL] ") << item.name << " - " << item.detail << "\n";
  }
  out << (report.all_passed() ? "selfcheck: all invariants hold\n"
                              : "selfcheck: INVARIANT VIOLATION\n");
  return out.str();
}

}  // namespace rsgd
