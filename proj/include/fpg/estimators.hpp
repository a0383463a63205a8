#pragma once

#include "fpg/analytic.hpp"
#include "fpg/critic.hpp"
#include "fpg/policy.hpp"
#include "fpg/rng.hpp"

namespace fpg {

// Estimator order: 0 = score-function, 1 = first action-derivative,
// 2 = second action-derivative (scale estimate only).
struct EstimatorOrder {
  int m = 0;

  explicit EstimatorOrder(int m_in);
};

// Gaussian score terms shared by the order-0 estimator and the density
// derivative identities below; keeping one code path makes the identities
// hold bitwise.
Vector score_vector(const GaussianPolicy& policy, const Vector& a);
Matrix score_matrix(const GaussianPolicy& policy, const Vector& a);

// Density derivatives in the action: grad = -score_vector * pdf and
// hessian = score_matrix * pdf.
Vector pdf_grad_a(const GaussianPolicy& policy, const Vector& a);
Matrix pdf_hessian_a(const GaussianPolicy& policy, const Vector& a);

// Single-sample gradient estimate at an action drawn (by the caller) from the
// policy. The expectation field carries the critic value at the sample.
GradientUpdate spg_update(const EstimatorOrder& order, const HybridCritic& critic,
                          const GaussianPolicy& policy, const Vector& a);

// Per-coordinate empirical mean and variance over repeated single-sample
// estimates; the variance fields of `variance` hold coordinatewise variances.
struct VarianceReport {
  GradientUpdate mean;
  GradientUpdate variance;
  long long n = 0;
};

VarianceReport estimator_variance(const EstimatorOrder& order,
                                  const HybridCritic& critic,
                                  const GaussianPolicy& policy, long long n_samples,
                                  RngStream& rng);

}  // namespace fpg
