#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsgd/csv.hpp"
#include "rsgd/rng.hpp"
#include "rsgd/runner.hpp"

namespace rsgd {

/**
 * Two-layer feedforward classifier over 50 features.
 *
 * Five hidden logistic units; unit i reads the contiguous feature block
 * [10 i, 10 i + 10) (disjoint blocks partition the 50 inputs) through 10
 * weights and a bias. A logistic output unit reads the 5 hidden activations
 * through 5 weights and a bias. Total parameter count 5 * 11 + 6 = 61.
 *
 * Parameter layout in the flat vector:
 *   [11 i, 11 i + 10)   weights of hidden unit i
 *   11 i + 10           bias of hidden unit i
 *   [55, 60)            output weights
 *   60                  output bias
 */
namespace net {
constexpr int kFeatures = 50;
constexpr int kHidden = 5;
constexpr int kBlock = 10;
constexpr int kParams = kHidden * (kBlock + 1) + kHidden + 1;  // 61
constexpr int kOutputWeightOffset = kHidden * (kBlock + 1);    // 55
}  // namespace net

struct LabeledExample {
  Eigen::VectorXd features;  ///< dimension 50
  int label;                 ///< 1 = signal, 0 = background
};

/// Numerically stable logistic 1 / (1 + exp(-t)).
inline double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace detail {

inline void check_params(const Eigen::VectorXd& params) {
  if (params.size() != net::kParams) {
    throw std::invalid_argument("network: parameter vector must have 61 entries");
  }
}

/// Forward pass with cached hidden activations.
inline double forward_impl(const Eigen::VectorXd& params, const double* x, double* hidden) {
  const double* w = params.data();
  double out_pre = params[net::kOutputWeightOffset + net::kHidden];  // output bias
  for (int i = 0; i < net::kHidden; ++i) {
    const double* wi = w + i * (net::kBlock + 1);
    const double* xi = x + i * net::kBlock;
    double pre = wi[net::kBlock];  // bias
    for (int j = 0; j < net::kBlock; ++j) pre += wi[j] * xi[j];
    hidden[i] = logistic(pre);
    out_pre += params[net::kOutputWeightOffset + i] * hidden[i];
  }
  return logistic(out_pre);
}

}  // namespace detail

/// Network output in (0, 1) for a 50-dimensional feature vector.
inline double forward(const Eigen::VectorXd& params, const Eigen::VectorXd& features) {
  detail::check_params(params);
  if (features.size() != net::kFeatures) {
    throw std::invalid_argument("forward: features must have 50 entries");
  }
  double hidden[net::kHidden];
  return detail::forward_impl(params, features.data(), hidden);
}

/// Squared-error loss (forward - label)^2; always in [0, 1].
inline double loss(const Eigen::VectorXd& params, const LabeledExample& example) {
  const double out = forward(params, example.features);
  const double diff = out - static_cast<double>(example.label);
  return diff * diff;
}

namespace detail {

/// Exact gradient of the squared-error loss; writes all 61 components.
inline double backprop_impl(const Eigen::VectorXd& params, const double* x, double label,
                            double* grad) {
  double hidden[net::kHidden];
  const double out = forward_impl(params, x, hidden);
  const double delta_out = 2.0 * (out - label) * out * (1.0 - out);
  for (int i = 0; i < net::kHidden; ++i) {
    const double v_i = params[net::kOutputWeightOffset + i];
    const double delta_h = delta_out * v_i * hidden[i] * (1.0 - hidden[i]);
    double* gi = grad + i * (net::kBlock + 1);
    const double* xi = x + i * net::kBlock;
    for (int j = 0; j < net::kBlock; ++j) gi[j] = delta_h * xi[j];
    gi[net::kBlock] = delta_h;
    grad[net::kOutputWeightOffset + i] = delta_out * hidden[i];
  }
  grad[net::kOutputWeightOffset + net::kHidden] = delta_out;
  const double diff = out - label;
  return diff * diff;
}

}  // namespace detail

/// Gradient of loss with respect to all 61 parameters, via the chain rule on
/// the cached forward activations.
inline Eigen::VectorXd backprop_grad(const Eigen::VectorXd& params,
                                     const LabeledExample& example) {
  detail::check_params(params);
  if (example.features.size() != net::kFeatures) {
    throw std::invalid_argument("backprop_grad: features must have 50 entries");
  }
  Eigen::VectorXd grad(net::kParams);
  detail::backprop_impl(params, example.features.data(), static_cast<double>(example.label),
                        grad.data());
  return grad;
}

/// Row-major example storage so each feature row is contiguous.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense dataset view consumed by training loops and metrics.
struct ExampleSet {
  RowMatrixXd features;     ///< n x 50
  std::vector<int> labels;  ///< n entries in {0, 1}

  std::int64_t size() const { return features.rows(); }
  const double* feature_row(std::int64_t i) const { return features.data() + i * net::kFeatures; }
};

struct DatasetMetrics {
  double mean_loss = 0.0;
  double misclassification_rate = 0.0;
  double total_gradient_norm = 0.0;  ///< l2 norm of the dataset-mean gradient
};

/// Mean loss and misclassification rate (prediction = forward >= 0.5).
/// Forward passes only; use dataset_metrics when the gradient norm is needed.
inline DatasetMetrics dataset_loss_metrics(const Eigen::VectorXd& params,
                                           const ExampleSet& data) {
  detail::check_params(params);
  if (data.size() == 0) throw std::invalid_argument("dataset metrics: empty dataset");
  double loss_sum = 0.0;
  std::int64_t misclassified = 0;
  double hidden[net::kHidden];
  for (std::int64_t i = 0; i < data.size(); ++i) {
    const double out = detail::forward_impl(params, data.feature_row(i), hidden);
    const double diff = out - static_cast<double>(data.labels[static_cast<std::size_t>(i)]);
    loss_sum += diff * diff;
    const int predicted = out >= 0.5 ? 1 : 0;
    if (predicted != data.labels[static_cast<std::size_t>(i)]) ++misclassified;
  }
  DatasetMetrics metrics;
  metrics.mean_loss = loss_sum / static_cast<double>(data.size());
  metrics.misclassification_rate =
      static_cast<double>(misclassified) / static_cast<double>(data.size());
  return metrics;
}

/// Dataset-mean gradient, accumulated in a fixed order for determinism.
inline Eigen::VectorXd dataset_mean_gradient(const Eigen::VectorXd& params,
                                             const ExampleSet& data) {
  detail::check_params(params);
  if (data.size() == 0) throw std::invalid_argument("dataset_mean_gradient: empty dataset");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(net::kParams);
  Eigen::VectorXd grad(net::kParams);
  for (std::int64_t i = 0; i < data.size(); ++i) {
    detail::backprop_impl(params, data.feature_row(i),
                          static_cast<double>(data.labels[static_cast<std::size_t>(i)]),
                          grad.data());
    total += grad;
  }
  return total / static_cast<double>(data.size());
}

/// Mean loss, misclassification rate and the norm of the mean gradient.
inline DatasetMetrics dataset_metrics(const Eigen::VectorXd& params, const ExampleSet& data) {
  DatasetMetrics metrics = dataset_loss_metrics(params, data);
  metrics.total_gradient_norm = dataset_mean_gradient(params, data).norm();
  return metrics;
}

/// Shared initialization: all 61 entries uniform on (-0.5, 0.5) from the seed.
inline Eigen::VectorXd init_net_params(std::uint64_t seed) {
  RngStream stream = RngStream::derive(seed, 0x4E37);
  Eigen::VectorXd params(net::kParams);
  for (int i = 0; i < net::kParams; ++i) params(i) = stream.uniform(-0.5, 0.5);
  return params;
}

}  // namespace rsgd
