#pragma once

#include <cstdint>
#include <vector>

#include "rsgd/bounds.hpp"

namespace rsgd::reference {

/**
 * Literal, slow evaluations of the decay series, kept deliberately
 * independent of the recurrence-based implementations they verify. Used by
 * the test suite and the selfcheck command only; O(k^2) and O(k) per value.
 */

/// A_k = alpha_k^2 + sum_{j=0}^{k-1} alpha_j^2 prod_{l=j+1}^{k} D_l, term by term.
template <class AlphaFn>
double a_k_double_sum(AlphaFn&& alpha_fn, const DecayModel& model, std::int64_t k) {
  const double alpha_k = alpha_fn(k);
  double total = alpha_k * alpha_k;
  for (std::int64_t j = 0; j < k; ++j) {
    double prod = 1.0;
    for (std::int64_t l = j + 1; l <= k; ++l) prod *= model.factor(alpha_fn(l));
    const double alpha_j = alpha_fn(j);
    total += alpha_j * alpha_j * prod;
  }
  return total;
}

/// prod_{j=0}^{k} D_j, term by term.
template <class AlphaFn>
double decay_product_direct(AlphaFn&& alpha_fn, const DecayModel& model, std::int64_t k) {
  double prod = 1.0;
  for (std::int64_t j = 0; j <= k; ++j) prod *= model.factor(alpha_fn(j));
  return prod;
}

/// Expected risk gap from the closed formula assembled out of the literal pieces.
template <class AlphaFn>
double expected_error_direct(double d, double noise_variance, AlphaFn&& alpha_fn,
                             double init_risk_gap, std::int64_t k) {
  const DecayModel model = DecayModel::ideal(d);
  return init_risk_gap * decay_product_direct(alpha_fn, model, k) +
         noise_variance / d * a_k_double_sum(alpha_fn, model, k);
}

}  // namespace rsgd::reference
