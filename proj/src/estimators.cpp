#include "fpg/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace fpg {

EstimatorOrder::EstimatorOrder(int m_in) : m(m_in) {
  if (m < 0 || m > 2) {
    throw std::invalid_argument("EstimatorOrder: m must be 0, 1, or 2");
  }
}

Vector score_vector(const GaussianPolicy& policy, const Vector& a) {
  if (a.size() != policy.dim()) {
    throw DimensionError("score_vector: action dimension mismatch");
  }
  return policy.scale.solve(a - policy.mean);
}

Matrix score_matrix(const GaussianPolicy& policy, const Vector& a) {
  const Vector u = score_vector(policy, a);
  return u * u.transpose() - policy.scale.inverse();
}

Vector pdf_grad_a(const GaussianPolicy& policy, const Vector& a) {
  return -score_vector(policy, a) * pdf(policy, a);
}

Matrix pdf_hessian_a(const GaussianPolicy& policy, const Vector& a) {
  return score_matrix(policy, a) * pdf(policy, a);
}

GradientUpdate spg_update(const EstimatorOrder& order, const HybridCritic& critic,
                          const GaussianPolicy& policy, const Vector& a) {
  if (critic.dim() != policy.dim() || a.size() != policy.dim()) {
    throw DimensionError("spg_update: dimension mismatch");
  }
  const Matrix& lower = policy.scale.lower();
  GradientUpdate update;
  update.expectation = eval(critic, a);

  switch (order.m) {
    case 0: {
      const double q = update.expectation;
      update.grad_mean = score_vector(policy, a) * q;
      const Matrix core = score_matrix(policy, a) * q;
      update.grad_cov = 0.5 * core;
      update.grad_scale = lower * core;
      break;
    }
    case 1: {
      const Vector g = grad_a(critic, a);
      update.grad_mean = g;
      const Vector whitened = policy.scale.solve_factor_t(a - policy.mean);
      update.grad_cov = 0.5 * (policy.scale.solve_factor(whitened) * g.transpose());
      update.grad_scale = whitened * g.transpose();
      break;
    }
    default: {
      const Matrix hess = hessian_a(critic, a);
      update.grad_cov = 0.5 * hess;
      update.grad_scale = lower * hess;
      break;
    }
  }
  return update;
}

namespace {

// Coordinatewise Welford accumulator over the flattened update.
class WelfordBlock {
 public:
  void init(Eigen::Index size) {
    mean_ = Eigen::ArrayXd::Zero(size);
    m2_ = Eigen::ArrayXd::Zero(size);
  }
  void add(const Eigen::ArrayXd& x, long long count) {
    const Eigen::ArrayXd delta = x - mean_;
    mean_ += delta / static_cast<double>(count);
    m2_ += delta * (x - mean_);
  }
  Eigen::ArrayXd mean() const { return mean_; }
  Eigen::ArrayXd variance(long long count) const {
    return m2_ / static_cast<double>(count - 1);
  }

 private:
  Eigen::ArrayXd mean_;
  Eigen::ArrayXd m2_;
};

Eigen::ArrayXd flatten(const Matrix& m) {
  return Eigen::Map<const Eigen::ArrayXd>(m.data(), m.size());
}

Matrix unflatten(const Eigen::ArrayXd& x, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

}  // namespace

VarianceReport estimator_variance(const EstimatorOrder& order,
                                  const HybridCritic& critic,
                                  const GaussianPolicy& policy, long long n_samples,
                                  RngStream& rng) {
  if (n_samples < 2) {
    throw std::invalid_argument("estimator_variance: need at least 2 samples");
  }
  const int n = policy.dim();
  const bool has_mean = order.m != 2;

  WelfordBlock value_acc, mean_acc, cov_acc, scale_acc;
  value_acc.init(1);
  if (has_mean) mean_acc.init(n);
  cov_acc.init(n * n);
  scale_acc.init(n * n);

  for (long long i = 1; i <= n_samples; ++i) {
    const Vector a = sample(policy, rng);
    const GradientUpdate u = spg_update(order, critic, policy, a);
    Eigen::ArrayXd value(1);
    value[0] = u.expectation;
    value_acc.add(value, i);
    if (has_mean) mean_acc.add(u.grad_mean->array(), i);
    cov_acc.add(flatten(u.grad_cov), i);
    scale_acc.add(flatten(u.grad_scale), i);
  }

  VarianceReport report;
  report.n = n_samples;
  report.mean.expectation = value_acc.mean()[0];
  report.variance.expectation = value_acc.variance(n_samples)[0];
  if (has_mean) {
    report.mean.grad_mean = mean_acc.mean().matrix();
    report.variance.grad_mean = mean_acc.variance(n_samples).matrix();
  }
  report.mean.grad_cov = unflatten(cov_acc.mean(), n, n);
  report.variance.grad_cov = unflatten(cov_acc.variance(n_samples), n, n);
  report.mean.grad_scale = unflatten(scale_acc.mean(), n, n);
  report.variance.grad_scale = unflatten(scale_acc.variance(n_samples), n, n);
  return report;
}

}  // namespace fpg
