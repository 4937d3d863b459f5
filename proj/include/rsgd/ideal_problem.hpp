#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rsgd/csv.hpp"
#include "rsgd/rng.hpp"

namespace rsgd {

/**
 * Orthonormal-design regression instance: covariates are drawn uniformly
 * from the columns of an orthonormal matrix Q, responses are
 * y = x' beta_star + eps with eps ~ Uniform(-b, b). The condition number of
 * the induced quadratic risk is one, which makes this the cleanest possible
 * testbed for a stochastic gradient method.
 */
struct IdealProblemSpec {
  int d = 0;
  Eigen::MatrixXd Q;            ///< d x d, columns orthonormal
  Eigen::VectorXd beta_star;    ///< true parameter, ||beta_star|| = beta_norm
  double noise_halfwidth = 0.0; ///< b >= 0; b == 0 is the noiseless degenerate case
  double beta_norm = 0.0;
  std::uint64_t seed = 0;
  bool identity_design = false;

  /// Var(eps) = b^2 / 3 for eps ~ Uniform(-b, b).
  double noise_variance() const { return noise_halfwidth * noise_halfwidth / 3.0; }
};

struct Observation {
  Eigen::Index column;  ///< x is exactly this column of Q
  double y;
};

/// Materialized covariate for an observation.
inline Eigen::VectorXd observation_x(const IdealProblemSpec& spec, const Observation& obs) {
  return spec.Q.col(obs.column);
}

/**
 * Deterministic instance construction. Q is the orthonormal factor of a
 * seeded Gaussian matrix with the QR signs normalized so R's diagonal is
 * positive; beta_star is a seeded uniform direction scaled to beta_norm.
 * Pass identity_design to use Q = I instead of a random rotation.
 */
inline IdealProblemSpec generate_problem(int d, double noise_halfwidth, double beta_norm,
                                         std::uint64_t seed, bool identity_design = false) {
  if (d < 1) throw std::invalid_argument("generate_problem: d must be >= 1");
  if (noise_halfwidth < 0.0) {
    throw std::invalid_argument("generate_problem: noise_halfwidth must be >= 0");
  }
  if (!(beta_norm > 0.0)) throw std::invalid_argument("generate_problem: beta_norm must be > 0");

  IdealProblemSpec spec;
  spec.d = d;
  spec.noise_halfwidth = noise_halfwidth;
  spec.beta_norm = beta_norm;
  spec.seed = seed;
  spec.identity_design = identity_design;

  RngStream design_stream = RngStream::derive(seed, 0xD351);
  if (identity_design) {
    spec.Q = Eigen::MatrixXd::Identity(d, d);
  } else {
    Eigen::MatrixXd gaussian(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) gaussian(i, j) = design_stream.gaussian();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
    spec.Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
      if (r(j, j) < 0.0) spec.Q.col(j) = -spec.Q.col(j);
    }
  }

  RngStream beta_stream = RngStream::derive(seed, 0xBE7A);
  Eigen::VectorXd direction(d);
  for (int i = 0; i < d; ++i) direction(i) = beta_stream.gaussian();
  const double norm = direction.norm();
  if (norm == 0.0) direction.setConstant(1.0 / std::sqrt(static_cast<double>(d)));
  spec.beta_star = beta_norm * direction / direction.norm();
  return spec;
}

/// One observation: x a uniformly chosen column of Q, y = x' beta_star + eps.
/// Stream call order is pinned (column, then noise) for reproducibility.
inline Observation sample_observation(const IdealProblemSpec& spec, RngStream& stream) {
  Observation obs;
  obs.column = static_cast<Eigen::Index>(stream.uniform_int(spec.d));
  const double eps = stream.uniform(-spec.noise_halfwidth, spec.noise_halfwidth);
  obs.y = spec.Q.col(obs.column).dot(spec.beta_star) + eps;
  return obs;
}

/// Population risk E[(y - x'beta)^2] = b^2/3 + ||beta - beta_star||^2 / d.
inline double risk(const IdealProblemSpec& spec, const Eigen::VectorXd& beta) {
  if (beta.size() != spec.d) throw std::invalid_argument("risk: dimension mismatch");
  return spec.noise_variance() + (beta - spec.beta_star).squaredNorm() / spec.d;
}

/**
 * Stochastic gradient oracle for the squared-error loss on this problem,
 * using the unit-coefficient convention grad = -x (y - x'theta), so that
 * theta - alpha * grad reproduces the update theta + alpha x (y - x'theta)
 * verbatim. Samples one fresh observation per call and fingerprints the
 * consumed stream so paired runs can prove they saw identical data.
 */
class IdealGradientOracle {
 public:
  IdealGradientOracle(const IdealProblemSpec& spec, RngStream stream)
      : spec_(&spec), stream_(stream) {}

  Eigen::Index dimension() const { return spec_->d; }

  void gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& out) {
    const Observation obs = sample_observation(*spec_, stream_);
    const auto x = spec_->Q.col(obs.column);
    const double residual = obs.y - x.dot(theta);
    out.noalias() = -residual * x;
    const std::int64_t col = obs.column;
    checksum_ = fnv1a64(&col, sizeof(col), checksum_);
    checksum_ = fnv1a64(&obs.y, sizeof(obs.y), checksum_);
    ++samples_;
  }

  std::uint64_t stream_checksum() const { return checksum_; }
  std::int64_t samples_consumed() const { return samples_; }

 private:
  const IdealProblemSpec* spec_;
  RngStream stream_;
  std::uint64_t checksum_ = 0xCBF29CE484222325ull;
  std::int64_t samples_ = 0;
};

/**
 * Running normal-equations accumulator: X'X and X'y over a stream of
 * observations, solved on demand. The solve is flagged rank-deficient until
 * the accumulated design spans the space (for the orthonormal design, until
 * every column has appeared at least once).
 */
class StreamingOls {
 public:
  enum class Status { ok, rank_deficient };

  struct Solution {
    Status status;
    Eigen::VectorXd beta;  ///< valid only when status == ok
  };

  explicit StreamingOls(int d) : xtx_(Eigen::MatrixXd::Zero(d, d)), xty_(Eigen::VectorXd::Zero(d)) {
    if (d < 1) throw std::invalid_argument("StreamingOls: d must be >= 1");
  }

  template <class Derived>
  void add(const Eigen::MatrixBase<Derived>& x, double y) {
    if (x.size() != xty_.size()) throw std::invalid_argument("StreamingOls: dimension mismatch");
    xtx_.template selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0);
    xty_.noalias() += y * x;
    ++count_;
  }

  void add(const IdealProblemSpec& spec, const Observation& obs) {
    add(spec.Q.col(obs.column), obs.y);
  }

  std::int64_t count() const { return count_; }

  Solution solve() const {
    Eigen::MatrixXd full = xtx_.selfadjointView<Eigen::Lower>();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(full);
    if (!lu.isInvertible()) return {Status::rank_deficient, Eigen::VectorXd()};
    return {Status::ok, lu.solve(xty_)};
  }

 private:
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
  std::int64_t count_ = 0;
};

/// Serializes the generating parameters as key=value lines; the matrices are
/// reconstructed deterministically from them on load.
inline void save_problem(const IdealProblemSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_problem: cannot open " + path);
  out << "d=" << spec.d << "\n";
  out << "noise_halfwidth=" << format_double(spec.noise_halfwidth) << "\n";
  out << "beta_norm=" << format_double(spec.beta_norm) << "\n";
  out << "seed=" << spec.seed << "\n";
  out << "identity_design=" << (spec.identity_design ? 1 : 0) << "\n";
}

inline IdealProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_problem: cannot open " + path);
  int d = -1, identity = 0;
  double b = -1.0, beta_norm = -1.0;
  std::uint64_t seed = 0;
  bool have_d = false, have_b = false, have_norm = false, have_seed = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("load_problem: malformed line: " + line);
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "d") {
      d = std::stoi(value);
      have_d = true;
    } else if (key == "noise_halfwidth") {
      b = std::stod(value);
      have_b = true;
    } else if (key == "beta_norm") {
      beta_norm = std::stod(value);
      have_norm = true;
    } else if (key == "seed") {
      seed = std::stoull(value);
      have_seed = true;
    } else if (key == "identity_design") {
      identity = std::stoi(value);
    }
  }
  if (!have_d || !have_b || !have_norm || !have_seed) {
    throw std::runtime_error("load_problem: missing field in " + path);
  }
  return generate_problem(d, b, beta_norm, seed, identity != 0);
}

}  // namespace rsgd
