// Acceptance suite: end-to-end checks of the library's statistical claims at
// desk scale. Each criterion prints one [PASS]/[FAIL] line; the process exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rsgd/experiments.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> run;
};

// Shared instance parameters for the statistical criteria.
constexpr std::uint64_t kSeed = 20240814;

double sample_mean(const std::vector<double>& xs) {
  double total = 0.0;
  for (const double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

double standard_error(const std::vector<double>& xs) {
  const double mean = sample_mean(xs);
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  const auto n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

// --------------------------------------------------------------------------
// 1. Exact expected-error formula versus Monte Carlo (equality, 4 SE).
// --------------------------------------------------------------------------
bool criterion_expected_error(std::string& detail) {
  const auto spec = rsgd::generate_problem(10, 5.0, 1.0, kSeed);
  const rsgd::Schedule schedule = rsgd::Schedule::power_law(0.7);
  const std::vector<std::int64_t> checkpoints = {100, 1'000, 10'000};
  const int runs = 2'000;

  std::vector<std::vector<double>> gaps(checkpoints.size(),
                                        std::vector<double>(static_cast<std::size_t>(runs)));
  rsgd::parallel_for_index(runs, 0, [&](std::int64_t r) {
    rsgd::RngStream stream = rsgd::RngStream::derive(kSeed, 100 + static_cast<std::uint64_t>(r));
    const auto out =
        rsgd::run_ideal_sgd(spec, schedule, std::nullopt, stream, checkpoints.back(), checkpoints);
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      const double err = out.l2_errors[c];
      gaps[c][static_cast<std::size_t>(r)] = err * err / spec.d;
    }
  });

  std::ostringstream msg;
  bool ok = true;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const double mean = sample_mean(gaps[c]);
    const double se = standard_error(gaps[c]);
    const double predicted =
        rsgd::expected_risk_gap_after_steps(spec, schedule, 1.0 / spec.d, checkpoints[c]);
    const double sigmas = std::abs(mean - predicted) / se;
    ok = ok && sigmas <= 4.0;
    msg << "k=" << checkpoints[c] << ": " << sigmas << " se; ";
  }
  detail = msg.str();
  return ok;
}

// --------------------------------------------------------------------------
// 2. Probability lower bounds hold empirically over the whole grid.
// --------------------------------------------------------------------------
bool criterion_bound_validity(std::string& detail) {
  const auto spec = rsgd::generate_problem(10, 5.0, 1.0, kSeed);
  const std::vector<double> exponents = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const std::vector<double> deltas = {0.1, 0.3};
  const std::vector<std::int64_t> checkpoints = {1'000, 10'000, 100'000};
  const int runs = 1'000;
  const double slack = 4.0 * std::sqrt(0.25 / runs);

  int violations = 0;
  int positive_bounds = 0;
  for (const double p : exponents) {
    const rsgd::Schedule schedule = rsgd::Schedule::power_law(p);
    std::vector<std::vector<double>> errors(
        checkpoints.size(), std::vector<double>(static_cast<std::size_t>(runs)));
    rsgd::parallel_for_index(runs, 0, [&](std::int64_t r) {
      rsgd::RngStream stream =
          rsgd::RngStream::derive(kSeed, 5'000 + static_cast<std::uint64_t>(r));
      const auto out = rsgd::run_ideal_sgd(spec, schedule, std::nullopt, stream,
                                           checkpoints.back(), checkpoints);
      for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        errors[c][static_cast<std::size_t>(r)] = out.l2_errors[c];
      }
    });
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      for (const double delta : deltas) {
        const double bound =
            rsgd::prob_lower_bound_ideal_after_steps(spec, schedule, 1.0, delta, checkpoints[c])
                .value;
        if (bound > 0.0) ++positive_bounds;
        int below = 0;
        for (const double err : errors[c]) {
          if (err <= delta) ++below;
        }
        const double freq = static_cast<double>(below) / runs;
        if (freq < bound - slack) ++violations;
      }
    }
  }
  std::ostringstream msg;
  msg << violations << " violations over 36 cells (" << positive_bounds
      << " cells with a positive bound)";
  detail = msg.str();
  return violations == 0;
}

// --------------------------------------------------------------------------
// 3. Bound-table pattern at d = 100 out to 10^10 observations, including the
//    documented initial-distance assumption for the nonzero entries.
// --------------------------------------------------------------------------
bool criterion_bound_table(std::string& detail) {
  const auto spec = rsgd::generate_problem(100, 5.0, 560.0, kSeed);
  const double init_dist_sq = 560.0 * 560.0;  // documented assumption, theta0 = 0
  const double delta = 0.1;
  const std::vector<double> exponents = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5};

  const auto bound_at = [&](double p, std::int64_t observations) {
    return rsgd::prob_lower_bound_ideal_after_steps(spec, rsgd::Schedule::power_law(p),
                                                    init_dist_sq, delta, observations)
        .value;
  };

  bool ok = true;
  std::ostringstream msg;
  // All entries are exactly zero after clamping through 10^6 observations.
  for (const std::int64_t n : {100LL, 10'000LL, 1'000'000LL}) {
    for (const double p : exponents) {
      if (bound_at(p, n) != 0.0) {
        ok = false;
        msg << "nonzero at (" << n << ", " << p << "); ";
      }
    }
  }
  // At 10^8 only p = 0.6 is positive.
  for (const double p : exponents) {
    const double value = bound_at(p, 100'000'000);
    if (p == 0.6) {
      if (!(value > 0.0)) {
        ok = false;
        msg << "p=0.6 at 1e8 not positive; ";
      }
      if (std::abs(value - 0.327) > 0.05) {
        ok = false;
        msg << "p=0.6 at 1e8 = " << value << "; ";
      }
    } else if (value != 0.0) {
      ok = false;
      msg << "p=" << p << " at 1e8 positive; ";
    }
  }
  // At 10^10: 0.996 / 0.958 / 0.583 for p = 0.7 / 0.6 / 0.5, zero above.
  const struct {
    double p;
    double expected;
  } tail[] = {{0.7, 0.996}, {0.6, 0.958}, {0.5, 0.583}};
  for (const auto& entry : tail) {
    const double value = bound_at(entry.p, 10'000'000'000LL);
    msg << "p=" << entry.p << "@1e10=" << value << "; ";
    if (std::abs(value - entry.expected) > 0.05) ok = false;
  }
  for (const double p : {1.0, 0.9, 0.8}) {
    if (bound_at(p, 10'000'000'000LL) != 0.0) {
      ok = false;
      msg << "p=" << p << " at 1e10 positive; ";
    }
  }
  detail = msg.str();
  return ok;
}

// --------------------------------------------------------------------------
// 4. Stalling at desk scale: slow decay beats fast decay by >= 1 decade.
// --------------------------------------------------------------------------
bool criterion_stalling(std::string& detail) {
  rsgd::ExperimentConfig config;
  config.d = 10;
  config.noise_halfwidth = 5.0;
  config.beta_norm = 20.0;
  config.observations = 1'000'000;
  config.exponents = {1.0, 0.6};
  config.seed = kSeed;
  const auto runs = rsgd::run_stall(config, false);
  const double log_fast_decay = std::log10(runs[0].l2_errors.back());  // p = 1.0
  const double log_slow_decay = std::log10(runs[1].l2_errors.back());  // p = 0.6
  std::ostringstream msg;
  msg << "log10 error p=1.0: " << log_fast_decay << ", p=0.6: " << log_slow_decay;
  detail = msg.str();
  return log_fast_decay - log_slow_decay >= 1.0;
}

// Shared by criteria 5 and 10.
std::vector<rsgd::MonteCarloRow> montecarlo_rows() {
  rsgd::ExperimentConfig config;
  config.d = 10;
  config.noise_halfwidth = 5.0;
  config.beta_norm = 20.0;
  config.observations = 1'000'000;
  config.runs = 100;
  config.exponents = {1.0, 0.5};
  config.first_trigger = 100;
  config.growth_factor = 1.56;
  config.seed = kSeed;
  return rsgd::run_montecarlo(config);
}

const rsgd::MonteCarloRow& find_row(const std::vector<rsgd::MonteCarloRow>& rows,
                                    const std::string& method, double p) {
  for (const auto& row : rows) {
    if (row.method == method && (!row.has_exponent || row.exponent == p)) return row;
  }
  throw std::runtime_error("montecarlo row not found: " + method);
}

bool criterion_restart_improvement(const std::vector<rsgd::MonteCarloRow>& rows,
                                   std::string& detail) {
  const double standard_10 = find_row(rows, "sgd", 1.0).stats.mean;
  const double restarted_10 = find_row(rows, "restarted_sgd", 1.0).stats.mean;
  const double standard_05 = find_row(rows, "sgd", 0.5).stats.mean;
  const double restarted_05 = find_row(rows, "restarted_sgd", 0.5).stats.mean;
  const double improvement = standard_10 / restarted_10;
  const double degradation = restarted_05 / standard_05;
  std::ostringstream msg;
  msg << "p=1.0 improvement factor " << improvement << "; p=0.5 degradation factor "
      << degradation;
  detail = msg.str();
  return improvement >= 2.0 && degradation <= 2.0;
}

// --------------------------------------------------------------------------
// 6. Recurrence equals the literal double sum across schedules and models.
// --------------------------------------------------------------------------
bool criterion_recurrence(std::string& detail) {
  std::vector<rsgd::DecayModel> models = {
      rsgd::DecayModel::ideal(1.0),          rsgd::DecayModel::ideal(10.0),
      rsgd::DecayModel::ideal(100.0),        rsgd::DecayModel::general(1.0, 1.0),
      rsgd::DecayModel::general(1.0, 2.0),   rsgd::DecayModel::general(0.5, 4.0),
  };
  double worst = 0.0;
  for (const double p : {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
    const rsgd::Schedule schedule = rsgd::Schedule::power_law(p);
    for (const auto& model : models) {
      const auto series = rsgd::a_k_series(schedule, model, 30);
      for (std::int64_t k = 0; k <= 30; ++k) {
        const double direct = rsgd::reference::a_k_double_sum(schedule, model, k);
        const double rel = std::abs(series[static_cast<std::size_t>(k)] - direct) /
                           std::max(1.0, std::abs(direct));
        worst = std::max(worst, rel);
      }
    }
  }
  std::ostringstream msg;
  msg << "max deviation " << worst;
  detail = msg.str();
  return worst <= 1e-12;
}

// --------------------------------------------------------------------------
// 7. Grid search confirms the optimal constant rate sigma / L^2.
// --------------------------------------------------------------------------
bool criterion_optimal_rate(std::string& detail) {
  rsgd::RngStream stream(kSeed);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const double sigma = stream.uniform(0.2, 2.0);
    const double lipschitz = sigma * stream.uniform(1.0, 5.0);
    const rsgd::DecayModel model = rsgd::DecayModel::general(sigma, lipschitz);
    const double optimal = rsgd::optimal_decay_rate(sigma, lipschitz);
    const double hi = 2.0 * optimal;
    const int cells = 10'000;  // resolution 1e-4 relative to the range
    double best_alpha = 0.0, best = model.factor(0.0);
    for (int i = 0; i <= cells; ++i) {
      const double alpha = hi * i / cells;
      const double f = model.factor(alpha);
      if (f < best) {
        best = f;
        best_alpha = alpha;
      }
    }
    worst = std::max(worst, std::abs(best_alpha - optimal) / hi);
  }
  std::ostringstream msg;
  msg << "max |argmin - sigma/L^2| = " << worst << " of the grid range";
  detail = msg.str();
  return worst <= 1e-4;
}

// --------------------------------------------------------------------------
// 8. Backprop gradient against central finite differences.
// --------------------------------------------------------------------------
bool criterion_gradient(std::string& detail) {
  rsgd::RngStream stream(kSeed);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd params(rsgd::net::kParams);
    for (int i = 0; i < rsgd::net::kParams; ++i) params(i) = stream.uniform(-1.0, 1.0);
    rsgd::LabeledExample example;
    example.features.resize(rsgd::net::kFeatures);
    for (int i = 0; i < rsgd::net::kFeatures; ++i) example.features(i) = stream.uniform(-2, 2);
    example.label = stream.next_double() < 0.5 ? 0 : 1;
    const Eigen::VectorXd grad = rsgd::backprop_grad(params, example);
    const double scale = std::max(grad.cwiseAbs().maxCoeff(), 1e-8);
    for (int i = 0; i < rsgd::net::kParams; ++i) {
      Eigen::VectorXd plus = params, minus = params;
      plus(i) += h;
      minus(i) -= h;
      const double fd =
          (rsgd::loss(plus, example) - rsgd::loss(minus, example)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - grad(i)) / scale);
    }
  }
  std::ostringstream msg;
  msg << "max relative component error " << worst;
  detail = msg.str();
  return worst < 1e-5;
}

// --------------------------------------------------------------------------
// 9. Restarted variants end closer to stationary points (gradient norms).
// --------------------------------------------------------------------------
bool criterion_neutrino(std::string& detail) {
  rsgd::ExperimentConfig config;
  config.synthetic = true;
  config.seed = kSeed;
  config.epochs = 30;
  config.record_every = 5000;
  config.sgd_exponent = 0.7;
  config.adagrad_eta = 0.001;
  config.first_trigger = 100;
  config.growth_factor = 1.56;
  const auto result = rsgd::run_neutrino(config);

  const auto norm_of = [&](const std::string& name) {
    for (const auto& method : result.methods) {
      if (method.name == name) return method.final_total_gradient_norm;
    }
    throw std::runtime_error("method missing: " + name);
  };
  const double sgd = norm_of("sgd");
  const double restarted_sgd = norm_of("restarted_sgd");
  const double adagrad = norm_of("adagrad");
  const double restarted_adagrad = norm_of("restarted_adagrad");
  std::ostringstream msg;
  msg << "(synthetic data) total gradient norms: sgd " << sgd << " vs restarted " << restarted_sgd
      << "; adagrad " << adagrad << " vs restarted " << restarted_adagrad;
  detail = msg.str();
  return restarted_sgd < sgd && restarted_adagrad < adagrad;
}

// --------------------------------------------------------------------------
// 10. Streaming OLS equals batch least squares and dominates stalling SGD.
// --------------------------------------------------------------------------
bool criterion_ols(const std::vector<rsgd::MonteCarloRow>& rows, std::string& detail) {
  const auto spec = rsgd::generate_problem(10, 5.0, 1.0, kSeed);
  rsgd::StreamingOls streaming(spec.d);
  const int n = 10'000;
  Eigen::MatrixXd design(n, spec.d);
  Eigen::VectorXd response(n);
  rsgd::RngStream stream = rsgd::RngStream::derive(kSeed, 31);
  for (int i = 0; i < n; ++i) {
    const auto obs = rsgd::sample_observation(spec, stream);
    design.row(i) = spec.Q.col(obs.column).transpose();
    response(i) = obs.y;
    streaming.add(spec, obs);
  }
  const Eigen::VectorXd batch = design.colPivHouseholderQr().solve(response);
  const auto solution = streaming.solve();
  if (solution.status != rsgd::StreamingOls::Status::ok) {
    detail = "streaming solve flagged rank deficient";
    return false;
  }
  const double agreement = (solution.beta - batch).cwiseAbs().maxCoeff();

  const double ols_mean = find_row(rows, "ols", 0.0).stats.mean;
  bool dominates = true;
  for (const auto& row : rows) {
    if (row.method == "sgd" && row.stats.mean <= ols_mean) dominates = false;
  }
  std::ostringstream msg;
  msg << "stream-vs-batch max |diff| " << agreement << "; ols mean " << ols_mean;
  detail = msg.str();
  return agreement < 1e-9 && dominates;
}

// --------------------------------------------------------------------------
// 11. Byte-identical outputs across reruns and thread counts.
// --------------------------------------------------------------------------
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool criterion_determinism(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "rsgd_acceptance_determinism";
  fs::remove_all(base);

  rsgd::ExperimentConfig config;
  config.d = 6;
  config.observations = 20'000;
  config.runs = 10;
  config.exponents = {0.7, 1.0};
  config.seed = kSeed;

  config.threads = 1;
  config.out_dir = (base / "serial").string();
  rsgd::cmd_montecarlo(config);
  rsgd::cmd_stall(config);
  config.threads = 4;
  config.out_dir = (base / "parallel").string();
  rsgd::cmd_montecarlo(config);
  rsgd::cmd_stall(config);

  bool ok = true;
  for (const std::string name : {"montecarlo.csv", "stall_p0.7.csv", "stall_p1.csv"}) {
    const std::string serial = slurp((base / "serial" / name).string());
    const std::string parallel = slurp((base / "parallel" / name).string());
    if (serial.empty() || serial != parallel) ok = false;
  }
  fs::remove_all(base);
  detail = ok ? "serial and 4-thread outputs byte-identical" : "outputs differ";
  return ok;
}

}  // namespace

int main() {
  std::vector<rsgd::MonteCarloRow> mc_rows;

  const std::vector<Criterion> criteria = {
      {1, "expected-error formula matches Monte Carlo (4 se)", criterion_expected_error},
      {2, "probability lower bounds hold over the grid", criterion_bound_validity},
      {3, "bound-table zero pattern and assumption-contingent values", criterion_bound_table},
      {4, "stalling: p=1.0 trails p=0.6 by >= 1 decade", criterion_stalling},
      {5, "restart improves p=1.0 by >= 2x, degrades p=0.5 by <= 2x",
       [&](std::string& detail) {
         if (mc_rows.empty()) mc_rows = montecarlo_rows();
         return criterion_restart_improvement(mc_rows, detail);
       }},
      {6, "A_k recurrence equals the literal double sum (1e-12)", criterion_recurrence},
      {7, "grid search confirms the optimal rate sigma/L^2", criterion_optimal_rate},
      {8, "backprop matches finite differences (rel < 1e-5)", criterion_gradient},
      {9, "restarted variants end nearer stationary points", criterion_neutrino},
      {10, "streaming OLS: batch agreement and error dominance",
       [&](std::string& detail) {
         if (mc_rows.empty()) mc_rows = montecarlo_rows();
         return criterion_ols(mc_rows, detail);
       }},
      {11, "byte-identical CSV across reruns and thread counts", criterion_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = Clock::now();
    std::string detail;
    bool passed = false;
    try {
      passed = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count() /
        1000.0;
    std::printf("[%s] criterion %2d: %s — %s (%.1fs)\n", passed ? "PASS" : "FAIL", criterion.id,
                criterion.name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!passed) ++failures;
  }
  if (failures == 0) {
    std::printf("acceptance: all %zu criteria passed\n", criteria.size());
  } else {
    std::printf("acceptance: %d criteria FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
