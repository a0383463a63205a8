#include "fpg/analytic.hpp"

#include <cmath>

#include <Eigen/LU>

namespace fpg {

namespace {

void require_dims(const CriticAtom& atom, const GaussianPolicy& policy) {
  if (atom_dim(atom) != policy.dim()) {
    throw DimensionError("analytic: atom and policy dimensions differ");
  }
}

double trig_damping(const TrigAtom& atom, const GaussianPolicy& policy) {
  return std::exp(-0.5 * (policy.scale.lower() * atom.freq).squaredNorm());
}

SpdFactor rbf_convolved_factor(const RbfAtom& atom, const GaussianPolicy& policy) {
  const Matrix total = spd_from_factor(policy.scale) + spd_from_factor(atom.shape);
  return SpdFactor::from_spd(total);
}

}  // namespace

double atom_expectation(const CriticAtom& atom, const GaussianPolicy& policy) {
  require_dims(atom, policy);
  return std::visit(
      [&policy](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrigAtom>) {
          return trig_damping(x, policy) * std::cos(x.freq.dot(policy.mean) - x.phase);
        } else if constexpr (std::is_same_v<T, RbfAtom>) {
          return gaussian_pdf(policy.mean, x.loc, rbf_convolved_factor(x, policy));
        } else if constexpr (std::is_same_v<T, QuadricAtom>) {
          const Matrix sigma = spd_from_factor(policy.scale);
          const Vector v = policy.mean - x.center;
          return (x.h_matrix * sigma).trace() + v.dot(x.h_matrix * v) + x.offset;
        } else {
          const double mu = policy.mean[0];
          const double sigma = policy.scale.lower()(0, 0);
          const double folded = sigma * std::sqrt(2.0 / M_PI) *
                                std::exp(-0.5 * mu * mu / (sigma * sigma));
          return folded + mu * (1.0 - 2.0 * std_normal_cdf(-mu / sigma));
        }
      },
      atom);
}

Vector atom_grad_mean(const CriticAtom& atom, const GaussianPolicy& policy) {
  require_dims(atom, policy);
  return std::visit(
      [&policy](const auto& x) -> Vector {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrigAtom>) {
          const double damping = trig_damping(x, policy);
          return -damping * std::sin(x.freq.dot(policy.mean) - x.phase) * x.freq;
        } else if constexpr (std::is_same_v<T, RbfAtom>) {
          const SpdFactor total = rbf_convolved_factor(x, policy);
          const double e = gaussian_pdf(policy.mean, x.loc, total);
          return -e * total.solve(policy.mean - x.loc);
        } else if constexpr (std::is_same_v<T, QuadricAtom>) {
          return 2.0 * (x.h_matrix * (policy.mean - x.center));
        } else {
          const double mu = policy.mean[0];
          const double sigma = policy.scale.lower()(0, 0);
          Vector g(1);
          g[0] = 1.0 - 2.0 * std_normal_cdf(-mu / sigma);
          return g;
        }
      },
      atom);
}

Matrix atom_grad_cov(const CriticAtom& atom, const GaussianPolicy& policy) {
  require_dims(atom, policy);
  return std::visit(
      [&policy](const auto& x) -> Matrix {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrigAtom>) {
          const double damping = trig_damping(x, policy);
          const double value = std::cos(x.freq.dot(policy.mean) - x.phase);
          // Materialize the outer product before scaling so the result is
          // exactly symmetric (scaling one factor first breaks that).
          const Matrix outer = x.freq * x.freq.transpose();
          return (-0.5 * damping * value) * outer;
        } else if constexpr (std::is_same_v<T, RbfAtom>) {
          const SpdFactor total = rbf_convolved_factor(x, policy);
          const double e = gaussian_pdf(policy.mean, x.loc, total);
          const Vector u = total.solve(policy.mean - x.loc);
          return 0.5 * e * (u * u.transpose() - total.inverse());
        } else if constexpr (std::is_same_v<T, QuadricAtom>) {
          return x.h_matrix;
        } else {
          const double mu = policy.mean[0];
          const double sigma = policy.scale.lower()(0, 0);
          Matrix g(1, 1);
          g(0, 0) = std::exp(-0.5 * mu * mu / (sigma * sigma)) /
                    (sigma * std::sqrt(2.0 * M_PI));
          return g;
        }
      },
      atom);
}

Matrix atom_grad_scale(const CriticAtom& atom, const GaussianPolicy& policy) {
  return 2.0 * (policy.scale.lower() * atom_grad_cov(atom, policy));
}

GradientUpdate atom_gradient(const CriticAtom& atom, const GaussianPolicy& policy) {
  GradientUpdate update;
  update.expectation = atom_expectation(atom, policy);
  update.grad_mean = atom_grad_mean(atom, policy);
  update.grad_cov = atom_grad_cov(atom, policy);
  update.grad_scale = 2.0 * (policy.scale.lower() * update.grad_cov);
  return update;
}

std::pair<GradientUpdate, std::vector<double>> hybrid_gradient(
    const HybridCritic& critic, const GaussianPolicy& policy) {
  const int n = policy.dim();
  GradientUpdate total;
  total.grad_mean = Vector::Zero(n);
  total.grad_cov = Matrix::Zero(n, n);
  total.grad_scale = Matrix::Zero(n, n);
  std::vector<double> coeff_grads(critic.size());

  for (int i = 0; i < critic.size(); ++i) {
    const double c = critic.coeffs()[i];
    const GradientUpdate part = atom_gradient(critic.atoms()[i], policy);
    coeff_grads[i] = part.expectation;
    total.expectation += c * part.expectation;
    *total.grad_mean += c * *part.grad_mean;
    total.grad_cov += c * part.grad_cov;
    total.grad_scale += c * part.grad_scale;
  }
  return {std::move(total), std::move(coeff_grads)};
}

MixtureGradientUpdate mixture_gradient(const HybridCritic& critic,
                                       const MixturePolicy& policy) {
  MixtureGradientUpdate result;
  result.per_component.reserve(policy.size());
  result.weight_grads.reserve(policy.size());
  for (const PolicyComponent& component : policy.components()) {
    if (const auto* gaussian = std::get_if<GaussianPolicy>(&component)) {
      auto [update, coeff_grads] = hybrid_gradient(critic, *gaussian);
      (void)coeff_grads;
      result.weight_grads.push_back(update.expectation);
      result.per_component.push_back(std::move(update));
    } else {
      const auto& dirac = std::get<DiracPolicy>(component);
      const int n = dirac.dim();
      GradientUpdate update;
      update.expectation = eval(critic, dirac.location);
      update.grad_mean = grad_a(critic, dirac.location);
      update.grad_cov = Matrix::Zero(n, n);
      update.grad_scale = Matrix::Zero(n, n);
      result.weight_grads.push_back(update.expectation);
      result.per_component.push_back(std::move(update));
    }
  }
  return result;
}

Vector rbf_natural_grad_mean(const RbfAtom& atom, const GaussianPolicy& policy) {
  if (atom.dim() != policy.dim()) {
    throw DimensionError("rbf_natural_grad_mean: dimensions differ");
  }
  const int n = policy.dim();
  const Matrix s = spd_from_factor(atom.shape);
  const Matrix weighting = s * policy.scale.inverse() + Matrix::Identity(n, n);
  return -0.5 * weighting.partialPivLu().solve(policy.mean - atom.loc);
}

}  // namespace fpg
