#include "fpg/policy.hpp"

#include <cmath>

namespace fpg {

GaussianPolicy::GaussianPolicy(Vector mean_in, SpdFactor scale_in)
    : mean(std::move(mean_in)), scale(std::move(scale_in)) {
  if (mean.size() != scale.dim()) {
    throw DimensionError("GaussianPolicy: mean and scale dimensions differ");
  }
  if (!mean.allFinite()) {
    throw std::invalid_argument("GaussianPolicy: non-finite mean");
  }
}

DiracPolicy::DiracPolicy(Vector location_in) : location(std::move(location_in)) {
  if (location.size() < 1 || !location.allFinite()) {
    throw std::invalid_argument("DiracPolicy: location must be finite and nonempty");
  }
}

int component_dim(const PolicyComponent& component) {
  return std::visit([](const auto& c) { return c.dim(); }, component);
}

MixturePolicy::MixturePolicy(std::vector<double> weights,
                             std::vector<PolicyComponent> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty() || weights_.size() != components_.size()) {
    throw std::invalid_argument("MixturePolicy: need matching, nonempty weights/components");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("MixturePolicy: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("MixturePolicy: weights must sum to 1 within 1e-12");
  }
  const int n = component_dim(components_.front());
  for (const auto& c : components_) {
    if (component_dim(c) != n) {
      throw DimensionError("MixturePolicy: components must share the action dimension");
    }
  }
}

Vector sample(const GaussianPolicy& policy, RngStream& rng) {
  const int n = policy.dim();
  Vector z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  return policy.mean + policy.scale.lower().transpose() * z;
}

Vector sample(const MixturePolicy& policy, RngStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  int chosen = policy.size() - 1;
  for (int i = 0; i < policy.size(); ++i) {
    cumulative += policy.weights()[i];
    if (u < cumulative) {
      chosen = i;
      break;
    }
  }
  const PolicyComponent& c = policy.components()[chosen];
  if (const auto* g = std::get_if<GaussianPolicy>(&c)) return sample(*g, rng);
  return std::get<DiracPolicy>(c).location;
}

double pdf(const GaussianPolicy& policy, const Vector& a) {
  return gaussian_pdf(a, policy.mean, policy.scale);
}

double auxiliary_pdf(const GaussianPolicy& policy, const Vector& x) {
  return gaussian_pdf(x, Vector::Zero(policy.dim()), policy.scale);
}

std::complex<double> characteristic_fn(const GaussianPolicy& policy, const Vector& omega,
                                       bool centered) {
  if (omega.size() != policy.dim()) {
    throw DimensionError("characteristic_fn: omega dimension mismatch");
  }
  const double damping = -0.5 * (policy.scale.lower() * omega).squaredNorm();
  if (centered) return {std::exp(damping), 0.0};
  return std::exp(std::complex<double>(damping, omega.dot(policy.mean)));
}

}  // namespace fpg
