#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsgd/csv.hpp"
#include "rsgd/ideal_problem.hpp"
#include "rsgd/schedule.hpp"

namespace rsgd {

/**
 * Per-step contraction model for the expected squared error.
 *
 *   ideal(d)          : factor(alpha) = 1 + (alpha^2 - 2 alpha) / d
 *   general(sigma, L) : factor(alpha) = 1 - 2 alpha sigma + alpha^2 L^2
 *
 * The ideal model coincides with general(1/d, 1/sqrt(d)); both are quadratics
 * in alpha with vertex at sigma / L^2, which is the rate that contracts
 * fastest. With sigma <= L the factor is never negative.
 */
class DecayModel {
 public:
  enum class Kind { ideal, general };

  static DecayModel ideal(double d) {
    if (!(d >= 1.0)) throw std::invalid_argument("DecayModel::ideal: d must be >= 1");
    DecayModel m;
    m.kind_ = Kind::ideal;
    m.d_ = d;
    return m;
  }

  static DecayModel general(double sigma, double lipschitz) {
    if (!(sigma > 0.0) || !(lipschitz > 0.0)) {
      throw std::invalid_argument("DecayModel::general: sigma and L must be > 0");
    }
    if (sigma > lipschitz) {
      throw std::invalid_argument("DecayModel::general: requires sigma <= L");
    }
    DecayModel m;
    m.kind_ = Kind::general;
    m.sigma_ = sigma;
    m.lipschitz_ = lipschitz;
    return m;
  }

  Kind kind() const { return kind_; }

  double factor(double alpha) const {
    if (kind_ == Kind::ideal) return 1.0 + (alpha * alpha - 2.0 * alpha) / d_;
    return 1.0 - 2.0 * alpha * sigma_ + alpha * alpha * lipschitz_ * lipschitz_;
  }

  /// Rate minimizing the factor: sigma / L^2 (ideal: 1).
  double vertex() const {
    if (kind_ == Kind::ideal) return 1.0;
    return sigma_ / (lipschitz_ * lipschitz_);
  }

  double dimension() const { return d_; }
  double sigma() const { return kind_ == Kind::ideal ? 1.0 / d_ : sigma_; }
  double lipschitz() const { return kind_ == Kind::ideal ? 1.0 / std::sqrt(d_) : lipschitz_; }

 private:
  DecayModel() = default;
  Kind kind_ = Kind::ideal;
  double d_ = 1.0;
  double sigma_ = 1.0;
  double lipschitz_ = 1.0;
};

inline double decay_factor(const DecayModel& model, double alpha) { return model.factor(alpha); }

/// The constant rate that minimizes the contraction factor.
inline double optimal_decay_rate(double sigma, double lipschitz) {
  if (!(sigma > 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument("optimal_decay_rate: sigma and L must be > 0");
  }
  return sigma / (lipschitz * lipschitz);
}

/**
 * Variance-accumulation sequence, literal indexing:
 *
 *   A_k = alpha_k^2 + sum_{j=0}^{k-1} alpha_j^2 prod_{l=j+1}^{k} D_l
 *
 * computed in O(k) via A_k = alpha_k^2 + D_k A_{k-1}, A_0 = alpha_0^2, which
 * is algebraically identical to the double sum (the tests compare against the
 * literal evaluation). Entry k describes the iterate after k+1 steps.
 */
template <class AlphaFn>
std::vector<double> a_k_series(AlphaFn&& alpha_fn, const DecayModel& model, std::int64_t k_max) {
  if (k_max < 0) throw std::invalid_argument("a_k_series: k_max must be >= 0");
  std::vector<double> series(static_cast<std::size_t>(k_max) + 1);
  double a = 0.0;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    const double alpha = alpha_fn(k);
    a = alpha * alpha + model.factor(alpha) * a;
    series[static_cast<std::size_t>(k)] = a;
  }
  return series;
}

/// Running products P_k = prod_{j=0}^{k} D_j, literal indexing. May underflow
/// to zero for long horizons; use evaluate_decay_series for log-space values.
template <class AlphaFn>
std::vector<double> decay_product_series(AlphaFn&& alpha_fn, const DecayModel& model,
                                         std::int64_t k_max) {
  if (k_max < 0) throw std::invalid_argument("decay_product_series: k_max must be >= 0");
  std::vector<double> series(static_cast<std::size_t>(k_max) + 1);
  double p = 1.0;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    p *= model.factor(alpha_fn(k));
    series[static_cast<std::size_t>(k)] = p;
  }
  return series;
}

/**
 * Point evaluation of (A_k, log P_k) at one or more (possibly huge) k.
 *
 * log_product is the log of |P_k| with product_sign tracking sign and exact
 * zeros (a factor of exactly zero makes the product zero from then on).
 * a_lo/a_hi and log_product_lo/hi are rigorous envelopes; they collapse onto
 * the central value wherever the evaluation was exact.
 */
struct SeriesPoint {
  std::int64_t k = 0;
  double alpha = 0.0;  ///< alpha_k
  double a = 0.0;
  double a_lo = 0.0;
  double a_hi = 0.0;
  double log_product = 0.0;  ///< -inf when the product is exactly zero
  double log_product_lo = 0.0;
  double log_product_hi = 0.0;
  int product_sign = 1;

  double product() const {
    if (product_sign == 0) return 0.0;
    return product_sign * std::exp(log_product);
  }
};

struct SeriesEvalOptions {
  /// Steps evaluated one at a time before the block tail engages.
  std::int64_t exact_limit = 1'000'000;
  /// Geometric block growth in the tail; smaller = tighter envelopes.
  double block_ratio = 1.001;
  /// Hard cap on the exact prefix when the tail regime is not reachable.
  std::int64_t exact_hard_cap = 50'000'000;
};

namespace detail {

/// Frozen-rate update over m steps: composes A <- D^m A + alpha^2 (1 - D^m)/(1 - D)
/// using lambda = -log D > 0.
inline void frozen_block_update(double& a, double alpha, double lambda, double m) {
  const double decay = std::exp(-m * lambda);
  const double geom = -std::expm1(-m * lambda) / -std::expm1(-lambda);
  a = a * decay + alpha * alpha * geom;
}

}  // namespace detail

/**
 * Evaluates the decay series at each requested k (sorted ascending, >= 0).
 *
 * Constant schedules use the closed geometric form. Power-law schedules run
 * the exact O(1)-per-step recurrence up to options.exact_limit (extended as
 * needed until the rate falls below half the model vertex), then cover the
 * remaining range with geometric blocks in which the rate is frozen at the
 * block's log-midpoint. Within the tail the rate is monotone below the
 * vertex, so freezing it at the block endpoints yields rigorous lower/upper
 * envelopes; with the default block ratio the envelope width is a few parts
 * in 10^4 and the midpoint value is accurate to ~1e-6 relative.
 */
inline std::vector<SeriesPoint> evaluate_decay_series(const Schedule& schedule,
                                                      const DecayModel& model,
                                                      std::vector<std::int64_t> ks,
                                                      const SeriesEvalOptions& options = {}) {
  if (!std::is_sorted(ks.begin(), ks.end())) {
    throw std::invalid_argument("evaluate_decay_series: ks must be sorted");
  }
  if (!ks.empty() && ks.front() < 0) {
    throw std::invalid_argument("evaluate_decay_series: ks must be >= 0");
  }
  std::vector<SeriesPoint> points;
  points.reserve(ks.size());
  if (ks.empty()) return points;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  if (schedule.kind() == Schedule::Kind::constant) {
    const double alpha = schedule.parameter();
    const double d_factor = model.factor(alpha);
    for (const std::int64_t k : ks) {
      SeriesPoint pt;
      pt.k = k;
      pt.alpha = alpha;
      const double steps = static_cast<double>(k) + 1.0;
      if (d_factor == 0.0) {
        pt.a = alpha * alpha;
        pt.log_product = neg_inf;
        pt.product_sign = 0;
      } else if (d_factor == 1.0) {
        pt.a = alpha * alpha * steps;
        pt.log_product = 0.0;
      } else if (d_factor > 0.0) {
        const double log_d = std::log(d_factor);
        // alpha^2 (1 - D^{k+1}) / (1 - D); overflows to +inf for D > 1.
        pt.a = alpha * alpha * -std::expm1(steps * log_d) / (1.0 - d_factor);
        pt.log_product = steps * log_d;
      } else {
        // Negative factors require sigma > L, which the model forbids, but a
        // caller-constructed degenerate case still gets a correct answer.
        const double log_d = std::log(-d_factor);
        pt.a = alpha * alpha * (1.0 - std::pow(d_factor, steps)) / (1.0 - d_factor);
        pt.log_product = steps * log_d;
        pt.product_sign = (k % 2 == 0) ? -1 : 1;
      }
      pt.a_lo = pt.a_hi = pt.a;
      pt.log_product_lo = pt.log_product_hi = pt.log_product;
      points.push_back(pt);
    }
    return points;
  }

  // Power-law schedule.
  const double p = schedule.parameter();
  const auto alpha_at = [p](double j) { return std::pow(j + 1.0, -p); };
  const double vertex = model.vertex();

  double a = 0.0, a_lo = 0.0, a_hi = 0.0;
  double log_p = 0.0, log_p_lo = 0.0, log_p_hi = 0.0;
  bool zero_product = false;
  std::int64_t j = 0;  // next literal index to process
  std::size_t next_k = 0;
  const std::int64_t k_last = ks.back();

  const auto capture = [&](std::int64_t k) {
    SeriesPoint pt;
    pt.k = k;
    pt.alpha = alpha_at(static_cast<double>(k));
    pt.a = a;
    pt.a_lo = a_lo;
    pt.a_hi = a_hi;
    pt.product_sign = zero_product ? 0 : 1;
    pt.log_product = zero_product ? neg_inf : log_p;
    pt.log_product_lo = zero_product ? neg_inf : log_p_lo;
    pt.log_product_hi = zero_product ? neg_inf : log_p_hi;
    points.push_back(pt);
  };

  // Exact prefix; runs at least to exact_limit and until the tail regime
  // (rate below half the vertex) is established.
  while (j <= k_last &&
         (j < options.exact_limit || alpha_at(static_cast<double>(j)) >= 0.5 * vertex)) {
    if (j > options.exact_hard_cap) {
      throw std::runtime_error(
          "evaluate_decay_series: tail regime unreachable within the exact-prefix cap");
    }
    const double alpha = alpha_at(static_cast<double>(j));
    const double factor = model.factor(alpha);
    a = alpha * alpha + factor * a;
    if (factor == 0.0) {
      zero_product = true;
    } else if (!zero_product) {
      log_p += std::log(factor);  // factor > 0 given sigma <= L
    }
    while (next_k < ks.size() && ks[next_k] == j) {
      a_lo = a_hi = a;
      log_p_lo = log_p_hi = log_p;
      capture(j);
      ++next_k;
    }
    ++j;
  }
  a_lo = a_hi = a;
  log_p_lo = log_p_hi = log_p;

  // Geometric-block tail with frozen rates. Blocks are additionally capped so
  // the decay mass m * lambda per block stays below ~0.05, which keeps the
  // frozen-rate bias of the injection term negligible; the number of blocks
  // then scales with the total decay mass, which is small at any usable k.
  while (j <= k_last) {
    const double alpha_left = alpha_at(static_cast<double>(j));
    const double lam_left = -std::log(model.factor(alpha_left));  // largest decay rate
    std::int64_t block_end = static_cast<std::int64_t>(options.block_ratio * static_cast<double>(j));
    if (lam_left > 0.0) {
      const double mass_cap = 0.05 / lam_left;
      if (mass_cap < static_cast<double>(block_end - j + 1)) {
        block_end = j + static_cast<std::int64_t>(mass_cap);
      }
    }
    block_end = std::max(block_end, j);
    if (next_k < ks.size()) block_end = std::min(block_end, ks[next_k]);
    block_end = std::min(block_end, k_last);

    const double m = static_cast<double>(block_end - j + 1);
    const double alpha_right = alpha_at(static_cast<double>(block_end));
    const double alpha_mid =
        alpha_at(std::sqrt((static_cast<double>(j) + 1.0) * (static_cast<double>(block_end) + 1.0)) -
                 1.0);
    const double lam_right = -std::log(model.factor(alpha_right));  // smallest decay rate
    const double lam_mid = -std::log(model.factor(alpha_mid));

    detail::frozen_block_update(a, alpha_mid, lam_mid, m);
    detail::frozen_block_update(a_lo, alpha_right, lam_left, m);
    detail::frozen_block_update(a_hi, alpha_left, lam_right, m);
    if (!zero_product) {
      log_p -= m * lam_mid;
      log_p_lo -= m * lam_left;
      log_p_hi -= m * lam_right;
    }

    while (next_k < ks.size() && ks[next_k] == block_end) {
      capture(block_end);
      ++next_k;
    }
    j = block_end + 1;
  }
  return points;
}

inline SeriesPoint evaluate_decay_series_at(const Schedule& schedule, const DecayModel& model,
                                            std::int64_t k,
                                            const SeriesEvalOptions& options = {}) {
  return evaluate_decay_series(schedule, model, {k}, options).front();
}

/**
 * Exact expected risk gap E[R(theta_k)] - R(beta_star) for the ideal problem,
 * literal indexing:
 *
 *   series[k] = init_risk_gap * P_k + (Var(eps)/d) * A_k
 *
 * Entry k describes the iterate after k+1 steps; see
 * expected_risk_gap_after_steps for the step-count convention.
 */
template <class AlphaFn>
std::vector<double> expected_error_series(const IdealProblemSpec& spec, AlphaFn&& alpha_fn,
                                          double init_risk_gap, std::int64_t k_max) {
  if (k_max < 0) throw std::invalid_argument("expected_error_series: k_max must be >= 0");
  if (init_risk_gap < 0.0) {
    throw std::invalid_argument("expected_error_series: init_risk_gap must be >= 0");
  }
  const DecayModel model = DecayModel::ideal(spec.d);
  const double noise_scale = spec.noise_variance() / spec.d;
  std::vector<double> series(static_cast<std::size_t>(k_max) + 1);
  double a = 0.0, prod = 1.0;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    const double alpha = alpha_fn(k);
    const double factor = model.factor(alpha);
    a = alpha * alpha + factor * a;
    prod *= factor;
    series[static_cast<std::size_t>(k)] = init_risk_gap * prod + noise_scale * a;
  }
  return series;
}

/// Expected risk gap after n_steps SGD steps (n_steps = 0 gives the initial gap).
template <class AlphaFn>
double expected_risk_gap_after_steps(const IdealProblemSpec& spec, AlphaFn&& alpha_fn,
                                     double init_risk_gap, std::int64_t n_steps) {
  if (n_steps < 0) throw std::invalid_argument("expected_risk_gap_after_steps: n_steps >= 0");
  if (n_steps == 0) return init_risk_gap;
  const DecayModel model = DecayModel::ideal(spec.d);
  const double noise_scale = spec.noise_variance() / spec.d;
  double a = 0.0, prod = 1.0;
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const double alpha = alpha_fn(k);
    const double factor = model.factor(alpha);
    a = alpha * alpha + factor * a;
    prod *= factor;
  }
  return init_risk_gap * prod + noise_scale * a;
}

/// A probability lower bound before clamping (raw) and clamped to [0, 1].
struct BoundValue {
  double raw;
  double value;
};

namespace detail {

inline BoundValue bound_from_point(const SeriesPoint& pt, double init_dist_sq,
                                   double noise_scale, double delta) {
  const double product = pt.product_sign == 0 ? 0.0 : std::exp(pt.log_product);
  const double numerator = init_dist_sq * product + noise_scale * pt.a;
  const double raw = 1.0 - numerator / (delta * delta);
  return {raw, std::clamp(raw, 0.0, 1.0)};
}

}  // namespace detail

/**
 * Probability lower bound for the ideal problem, literal indexing:
 *
 *   P(||theta_k - beta_star|| <= delta)
 *     >= 1 - (||theta_0 - beta_star||^2 P_k + Var(eps) A_k) / delta^2
 *
 * clamped to [0, 1]; the raw value is exposed for diagnostics.
 */
inline BoundValue prob_lower_bound_ideal(const IdealProblemSpec& spec, const Schedule& schedule,
                                         double init_dist_sq, double delta, std::int64_t k,
                                         const SeriesEvalOptions& options = {}) {
  if (!(delta > 0.0)) throw std::invalid_argument("prob_lower_bound_ideal: delta must be > 0");
  const SeriesPoint pt =
      evaluate_decay_series_at(schedule, DecayModel::ideal(spec.d), k, options);
  return detail::bound_from_point(pt, init_dist_sq, spec.noise_variance(), delta);
}

/// Same bound with the step-count convention: position after n_steps steps.
inline BoundValue prob_lower_bound_ideal_after_steps(const IdealProblemSpec& spec,
                                                     const Schedule& schedule,
                                                     double init_dist_sq, double delta,
                                                     std::int64_t n_steps,
                                                     const SeriesEvalOptions& options = {}) {
  if (!(delta > 0.0)) throw std::invalid_argument("prob_lower_bound: delta must be > 0");
  if (n_steps < 0) throw std::invalid_argument("prob_lower_bound: n_steps must be >= 0");
  if (n_steps == 0) {
    const double raw = 1.0 - init_dist_sq / (delta * delta);
    return {raw, std::clamp(raw, 0.0, 1.0)};
  }
  return prob_lower_bound_ideal(spec, schedule, init_dist_sq, delta, n_steps - 1, options);
}

/**
 * Strongly convex / Lipschitz-gradient problem description for the general
 * bound: sigma <= L, C bounds the spectral norm of the gradient variance,
 * init_error_sq = ||theta_0 - beta_star||^2, delta the target radius.
 */
struct GeneralProblemParams {
  double sigma;
  double lipschitz;
  double variance_bound;  ///< C
  double init_error_sq;
  double delta;

  GeneralProblemParams(double sigma_, double lipschitz_, double variance_bound_,
                       double init_error_sq_, double delta_)
      : sigma(sigma_),
        lipschitz(lipschitz_),
        variance_bound(variance_bound_),
        init_error_sq(init_error_sq_),
        delta(delta_) {
    if (!(sigma > 0.0) || !(lipschitz > 0.0) || sigma > lipschitz) {
      throw std::invalid_argument("GeneralProblemParams: need 0 < sigma <= L");
    }
    if (variance_bound < 0.0) {
      throw std::invalid_argument("GeneralProblemParams: variance_bound must be >= 0");
    }
    if (init_error_sq < 0.0) {
      throw std::invalid_argument("GeneralProblemParams: init_error_sq must be >= 0");
    }
    if (!(delta > 0.0)) throw std::invalid_argument("GeneralProblemParams: delta must be > 0");
  }
};

/// General-problem probability lower bound, literal indexing, clamped to [0, 1].
inline BoundValue prob_lower_bound_general(const GeneralProblemParams& params,
                                           const Schedule& schedule, std::int64_t k,
                                           const SeriesEvalOptions& options = {}) {
  const SeriesPoint pt = evaluate_decay_series_at(
      schedule, DecayModel::general(params.sigma, params.lipschitz), k, options);
  return detail::bound_from_point(pt, params.init_error_sq, params.variance_bound, params.delta);
}

inline BoundValue prob_lower_bound_general_after_steps(const GeneralProblemParams& params,
                                                       const Schedule& schedule,
                                                       std::int64_t n_steps,
                                                       const SeriesEvalOptions& options = {}) {
  if (n_steps < 0) throw std::invalid_argument("prob_lower_bound: n_steps must be >= 0");
  if (n_steps == 0) {
    const double raw = 1.0 - params.init_error_sq / (params.delta * params.delta);
    return {raw, std::clamp(raw, 0.0, 1.0)};
  }
  return prob_lower_bound_general(params, schedule, n_steps - 1, options);
}

/**
 * Observation-indexed bound table for one schedule: row n describes the
 * iterate after n observations (alpha is the rate used at the last step,
 * A_k and decay_product are the accumulations through those n steps).
 */
struct BoundSeries {
  std::vector<std::int64_t> observations;
  std::vector<double> alpha;
  std::vector<double> a_k;
  std::vector<double> decay_product;
  std::vector<double> expected_error;
  std::vector<double> prob_lower_bound;
};

inline BoundSeries compute_bound_series(const IdealProblemSpec& spec, const Schedule& schedule,
                                        double init_dist_sq, double delta,
                                        const std::vector<std::int64_t>& observations,
                                        const SeriesEvalOptions& options = {}) {
  if (!(delta > 0.0)) throw std::invalid_argument("compute_bound_series: delta must be > 0");
  std::vector<std::int64_t> ks;
  ks.reserve(observations.size());
  for (const auto n : observations) {
    if (n < 1) throw std::invalid_argument("compute_bound_series: observations must be >= 1");
    ks.push_back(n - 1);
  }
  if (!std::is_sorted(ks.begin(), ks.end())) {
    throw std::invalid_argument("compute_bound_series: observations must be sorted");
  }
  const auto pts = evaluate_decay_series(schedule, DecayModel::ideal(spec.d), ks, options);
  BoundSeries series;
  series.observations = observations;
  const double noise_var = spec.noise_variance();
  for (const auto& pt : pts) {
    const double product = pt.product_sign == 0 ? 0.0 : std::exp(pt.log_product);
    series.alpha.push_back(pt.alpha);
    series.a_k.push_back(pt.a);
    series.decay_product.push_back(product);
    series.expected_error.push_back((init_dist_sq * product + noise_var * pt.a) / spec.d);
    series.prob_lower_bound.push_back(
        detail::bound_from_point(pt, init_dist_sq, noise_var, delta).value);
  }
  return series;
}

inline void write_bound_series_csv(const BoundSeries& series, CsvWriter& csv) {
  csv.header({"k", "alpha", "A_k", "decay_product", "expected_error", "prob_lower_bound"});
  for (std::size_t i = 0; i < series.observations.size(); ++i) {
    csv.row({CsvWriter::cell(series.observations[i]), CsvWriter::cell(series.alpha[i]),
             CsvWriter::cell(series.a_k[i]), CsvWriter::cell(series.decay_product[i]),
             CsvWriter::cell(series.expected_error[i]),
             CsvWriter::cell(series.prob_lower_bound[i])});
  }
}

}  // namespace rsgd
