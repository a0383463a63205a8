#pragma once

#include <functional>
#include <stdexcept>
#include <utility>

#include "fpg/critic.hpp"
#include "fpg/policy.hpp"
#include "fpg/rng.hpp"

namespace fpg {

// Sampled function fails to decay inside the verification grid.
class WindowingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureSpec {
  int nodes_per_dim = 32;
  int dimension = 1;

  QuadratureSpec(int nodes_per_dim_in, int dimension_in);
};

struct GridSpec {
  double half_width = 8.0;
  int points = 1024;

  GridSpec(double half_width_in, int points_in);
};

// Gauss-Hermite tensor-product expectation of the critic under the policy,
// whitened through the covariance factor.
double quad_expectation(const HybridCritic& critic, const GaussianPolicy& policy,
                        const QuadratureSpec& spec);

// Monte Carlo expectation with standard error.
std::pair<double, double> mc_expectation(const HybridCritic& critic,
                                         const GaussianPolicy& policy, long long n,
                                         RngStream& rng);
std::pair<double, double> mc_expectation(const HybridCritic& critic,
                                         const MixturePolicy& policy, long long n,
                                         RngStream& rng);

// Central finite differences over parameter blocks.
double finite_diff_scalar(const std::function<double(double)>& f, double point,
                          double step);
Vector finite_diff(const std::function<double(const Vector&)>& f, const Vector& point,
                   double step);
// Entrywise matrix derivative; with `symmetrize` each off-diagonal pair is
// perturbed jointly by step/2 so the perturbed matrix stays symmetric.
Matrix finite_diff_matrix(const std::function<double(const Matrix&)>& f,
                          const Matrix& point, double step, bool symmetrize);
// Second-derivative (Hessian) of a scalar function of a vector.
Matrix finite_diff_second(const std::function<double(const Vector&)>& f,
                          const Vector& point, double step);

// Discrete-transform witnesses that differentiation becomes multiplication by
// (i omega): transform a sampled window, multiply, invert, and compare to a
// direct derivative. Returns the max interior deviation.
double dft_lemma_check_vector(const GridSpec& grid,
                              const std::function<double(double)>& f);
double dft_lemma_check_matrix(const GridSpec& grid,
                              const std::function<double(double)>& f);
double dft_lemma_check_matrix(const GridSpec& grid,
                              const std::function<double(double, double)>& f);

// Pluggable Gaussian density derivatives so the auxiliary-function check can
// be pointed at alternative implementations (or deliberately broken ones).
struct GaussianDerivatives {
  std::function<double(const GaussianPolicy&, const Vector&)> value;
  std::function<Vector(const GaussianPolicy&, const Vector&)> grad;
  std::function<Matrix(const GaussianPolicy&, const Vector&)> hessian;
};

GaussianDerivatives default_gaussian_derivatives();

// Checks (d/dx)^m applied to the reflected density at mu - a against
// (-1)^m times the analytic action-derivative of the density at a, over 100
// internally seeded random actions. Returns the max deviation.
double aux_lemma_check(const GaussianPolicy& policy, int m);
double aux_lemma_check_against(const GaussianPolicy& policy, int m,
                               const GaussianDerivatives& derivatives);

}  // namespace fpg
