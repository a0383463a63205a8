#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fpg/critic.hpp"
#include "fpg/policy.hpp"

namespace fpg {

// One policy-gradient update: the expected critic value E together with its
// gradients in the policy mean, the covariance, and the covariance factor.
// grad_mean is optional because the second-order sampled estimator carries no
// mean estimate; analytic results always populate it.
struct GradientUpdate {
  double expectation = 0.0;
  std::optional<Vector> grad_mean;
  Matrix grad_cov;
  Matrix grad_scale;
};

// Mixture decomposition: raw per-component updates (not weighted) plus the
// per-component expectations that drive the mixture-weight gradient.
struct MixtureGradientUpdate {
  std::vector<GradientUpdate> per_component;
  std::vector<double> weight_grads;
};

double atom_expectation(const CriticAtom& atom, const GaussianPolicy& policy);
Vector atom_grad_mean(const CriticAtom& atom, const GaussianPolicy& policy);
Matrix atom_grad_cov(const CriticAtom& atom, const GaussianPolicy& policy);
// Gradient in the covariance factor A (with covariance A^T A): exactly
// 2 * A * atom_grad_cov by construction.
Matrix atom_grad_scale(const CriticAtom& atom, const GaussianPolicy& policy);

GradientUpdate atom_gradient(const CriticAtom& atom, const GaussianPolicy& policy);

// Coefficient-weighted sums over atoms; second element holds the per-atom
// expectations (the gradient of E in each coefficient).
std::pair<GradientUpdate, std::vector<double>> hybrid_gradient(
    const HybridCritic& critic, const GaussianPolicy& policy);

MixtureGradientUpdate mixture_gradient(const HybridCritic& critic,
                                       const MixturePolicy& policy);

// Fisher-preconditioned mean direction -1/2 (S Sigma^-1 + I)^-1 (mu - l),
// returned without the positive expectation scalar (direction only).
Vector rbf_natural_grad_mean(const RbfAtom& atom, const GaussianPolicy& policy);

}  // namespace fpg
