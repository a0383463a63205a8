#pragma once

#include <complex>
#include <variant>
#include <vector>

#include "fpg/linalg.hpp"
#include "fpg/rng.hpp"

namespace fpg {

/// N(mean, sigma) with sigma = scale.lower()ᵀ·scale.lower().
struct GaussianPolicy {
  Vector mean;
  SpdFactor scale;

  GaussianPolicy(Vector mean_in, SpdFactor scale_in);
  int dim() const { return static_cast<int>(mean.size()); }
};

/// Deterministic policy: a point mass at `location`.
struct DiracPolicy {
  Vector location;

  explicit DiracPolicy(Vector location_in);
  int dim() const { return static_cast<int>(location.size()); }
};

using PolicyComponent = std::variant<GaussianPolicy, DiracPolicy>;

int component_dim(const PolicyComponent& component);

/// Convex combination of Gaussian and Dirac components.  Weights are
/// validated on construction (nonnegative, sum to 1 within 1e-12, nonempty,
/// equal component dimensions) and the value is immutable afterwards.
class MixturePolicy {
 public:
  MixturePolicy(std::vector<double> weights, std::vector<PolicyComponent> components);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<PolicyComponent>& components() const { return components_; }
  int size() const { return static_cast<int>(components_.size()); }
  int dim() const { return component_dim(components_.front()); }

 private:
  std::vector<double> weights_;
  std::vector<PolicyComponent> components_;
};

/// Draws mean + scaleᵀz with z i.i.d. standard normal.
Vector sample(const GaussianPolicy& policy, RngStream& rng);

/// Selects a component by inverse CDF over the weights with a single uniform
/// draw, then samples the component (Dirac components consume no draws).
Vector sample(const MixturePolicy& policy, RngStream& rng);

/// beta(a) = N(a; mean, sigma).
double pdf(const GaussianPolicy& policy, const Vector& a);

/// Auxiliary reflected density beta~(x) = N(x; 0, sigma).  Shares the
/// evaluation path with pdf, so auxiliary_pdf(mean - a) == pdf(a) exactly.
double auxiliary_pdf(const GaussianPolicy& policy, const Vector& x);

/// centered: e^{-½ωᵀ sigma ω} (real);  uncentered: e^{iωᵀμ - ½ωᵀ sigma ω}.
std::complex<double> characteristic_fn(const GaussianPolicy& policy, const Vector& omega,
                                       bool centered);

}  // namespace fpg
