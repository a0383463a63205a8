#include "fpg/verify.hpp"

#include <cmath>
#include <sstream>

#include "fpg/analytic.hpp"
#include "fpg/config.hpp"
#include "fpg/critic.hpp"
#include "fpg/oracle.hpp"
#include "fpg/policy.hpp"
#include "fpg/rng.hpp"

namespace fpg {

namespace {

Vector random_vector(RngStream& rng, int n, double scale) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

SpdFactor random_factor(RngStream& rng, int n) {
  Matrix lower = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    lower(i, i) = 0.4 + 0.8 * rng.uniform();
    for (int j = 0; j < i; ++j) lower(i, j) = 0.3 * rng.normal();
  }
  return SpdFactor(lower);
}

GaussianPolicy random_policy(RngStream& rng, int n) {
  return GaussianPolicy(random_vector(rng, n, 0.8), random_factor(rng, n));
}

CriticAtom random_atom(RngStream& rng, int family, int n, const Vector& near) {
  switch (family) {
    case 0:
      return TrigAtom(random_vector(rng, n, 1.0), 2.0 * rng.uniform() - 1.0);
    case 1:
      return RbfAtom(near + random_vector(rng, n, 0.6), random_factor(rng, n));
    case 2: {
      const Matrix a = Matrix::NullaryExpr(n, n, [&](Eigen::Index, Eigen::Index) {
        return 0.7 * rng.normal();
      });
      return QuadricAtom(0.5 * (a + a.transpose()), random_vector(rng, n, 0.8),
                         rng.normal());
    }
    default:
      return AbsAtom{};
  }
}

// Floor sits above the quadrature's accumulated roundoff so near-zero
// expectation crossings compare absolutely rather than blowing up the ratio.
double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-6);
}

// (atom, policy) pairs the 32-node tensor rule resolves to full accuracy:
// rbf kernels are broadened to at least the policy covariance and abs means
// sit 5-7 sigma from the kink; trig/quadric need no restriction.
std::pair<CriticAtom, GaussianPolicy> quadrature_instance(RngStream& rng, int family,
                                                          int n) {
  GaussianPolicy policy = random_policy(rng, n);
  if (family == 1) {
    const Matrix broad =
        spd_from_factor(random_factor(rng, n)) + spd_from_factor(policy.scale);
    return {RbfAtom(policy.mean + random_vector(rng, n, 0.6),
                    SpdFactor::from_spd(broad)),
            std::move(policy)};
  }
  if (family == 3) {
    const double sigma = policy.scale.lower()(0, 0);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Vector mu(1);
    mu[0] = sign * (5.0 + 2.0 * rng.uniform()) * sigma;
    return {AbsAtom{}, GaussianPolicy(mu, policy.scale)};
  }
  return {random_atom(rng, family, n, policy.mean), std::move(policy)};
}

double check_expectations(int family) {
  RngStream rng(0xABC0 + family);
  double worst = 0.0;
  const int max_dim = family == 3 ? 1 : 3;
  for (int n = 1; n <= max_dim; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto [atom, policy] = quadrature_instance(rng, family, n);
      const HybridCritic critic({atom}, {1.0});
      const double analytic = hybrid_gradient(critic, policy).first.expectation;
      const double quad = quad_expectation(critic, policy, QuadratureSpec(32, n));
      worst = std::max(worst, relative_error(analytic, quad));
    }
  }
  return worst;
}

double fd_relative(double got, double want) {
  return std::abs(got - want) / (std::abs(want) + 1e-6);
}

struct FdErrors {
  double mean = 0.0;
  double cov = 0.0;
  double scale = 0.0;
};

FdErrors check_finite_differences() {
  RngStream rng(0xFD5);
  FdErrors worst;
  for (int family = 0; family < 4; ++family) {
    const int max_dim = family == 3 ? 1 : 3;
    for (int n = 1; n <= max_dim; ++n) {
      for (int trial = 0; trial < 4; ++trial) {
        const GaussianPolicy policy = random_policy(rng, n);
        const CriticAtom atom = random_atom(rng, family, n, policy.mean);

        const Vector grad_mean = atom_grad_mean(atom, policy);
        const auto by_mean = [&](const Vector& mu) {
          return atom_expectation(atom, GaussianPolicy(mu, policy.scale));
        };
        const Vector fd_mean = finite_diff(by_mean, policy.mean, 1e-5);
        for (int i = 0; i < n; ++i) {
          worst.mean = std::max(worst.mean, fd_relative(grad_mean[i], fd_mean[i]));
        }

        const Matrix grad_cov = atom_grad_cov(atom, policy);
        const Matrix sigma = spd_from_factor(policy.scale);
        const auto by_cov = [&](const Matrix& s) {
          return atom_expectation(atom,
                                  GaussianPolicy(policy.mean, SpdFactor::from_spd(s)));
        };
        const Matrix fd_cov = finite_diff_matrix(by_cov, sigma, 1e-4, true);
        const Matrix grad_scale = atom_grad_scale(atom, policy);
        const auto by_scale = [&](const Matrix& factor) {
          return atom_expectation(
              atom, GaussianPolicy(policy.mean,
                                   SpdFactor::from_spd(factor.transpose() * factor)));
        };
        const Matrix fd_scale =
            finite_diff_matrix(by_scale, Matrix(policy.scale.lower()), 1e-5, false);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            worst.cov = std::max(worst.cov, fd_relative(grad_cov(i, j), fd_cov(i, j)));
            worst.scale =
                std::max(worst.scale, fd_relative(grad_scale(i, j), fd_scale(i, j)));
          }
        }
      }
    }
  }
  return worst;
}

std::pair<double, double> check_mc_consistency() {
  Vector freq(2);
  freq << 1.1, -0.4;
  Matrix h(2, 2);
  h << 0.8, 0.2, 0.2, 0.5;
  Vector center(2);
  center << 0.3, -0.2;
  const HybridCritic critic({TrigAtom(freq, 0.4), QuadricAtom(h, center, 0.7)},
                            {0.9, 0.6});
  Vector mean(2);
  mean << 0.25, -0.4;
  Matrix lower(2, 2);
  lower << 0.7, 0.0, 0.2, 0.5;
  const GaussianPolicy policy(mean, SpdFactor(lower));

  const double analytic = hybrid_gradient(critic, policy).first.expectation;
  RngStream rng(9001);
  const auto [mc, se] = mc_expectation(critic, policy, 200000, rng);
  return {std::abs(analytic - mc), 4.0 * se};
}

double check_natural_grad_identity() {
  RngStream rng(0x7A8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 3.0);
    const GaussianPolicy policy = random_policy(rng, n);
    const RbfAtom atom(policy.mean + random_vector(rng, n, 0.6),
                       random_factor(rng, n));
    const Vector direct = rbf_natural_grad_mean(atom, policy);

    // second route through the covariance-weighted analytic mean gradient
    const double e = atom_expectation(atom, policy);
    const Vector via_grad = 0.5 * spd_from_factor(policy.scale) *
                            atom_grad_mean(atom, policy) / e;
    worst = std::max(worst, (direct - via_grad).cwiseAbs().maxCoeff());
  }
  return worst;
}

double check_natural_grad_equal_shape() {
  RngStream rng(0x7A9);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 3.0);
    const GaussianPolicy policy = random_policy(rng, n);
    const RbfAtom atom(random_vector(rng, n, 1.0), policy.scale);
    const Vector got = rbf_natural_grad_mean(atom, policy);
    const Vector want = -0.25 * (policy.mean - atom.loc);
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
  }
  return worst;
}

double check_aux(int order, bool mutate) {
  GaussianDerivatives derivatives = default_gaussian_derivatives();
  if (mutate) {
    const auto base = derivatives.grad;
    derivatives.grad = [base](const GaussianPolicy& policy, const Vector& a) {
      return Vector(-base(policy, a));
    };
  }
  double worst = 0.0;
  RngStream rng(0xA0 + order);
  for (int n = 1; n <= 3; ++n) {
    const GaussianPolicy policy = random_policy(rng, n);
    worst = std::max(worst, aux_lemma_check_against(policy, order, derivatives));
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  const auto add = [&](const std::string& name, double max_error, double tolerance) {
    if (!options.only_prefix.empty() &&
        name.rfind(options.only_prefix, 0) != 0) {
      return;
    }
    results.push_back({name, max_error, tolerance, max_error <= tolerance});
  };
  const auto wanted = [&](const std::string& name) {
    return options.only_prefix.empty() || name.rfind(options.only_prefix, 0) == 0;
  };

  if (wanted("dft_vector_gaussian")) {
    add("dft_vector_gaussian",
        dft_lemma_check_vector(GridSpec(8.0, 1024),
                               [](double x) { return std::exp(-0.5 * x * x); }),
        1e-6);
  }
  if (wanted("dft_vector_modulated")) {
    add("dft_vector_modulated",
        dft_lemma_check_vector(GridSpec(8.0, 1024),
                               [](double x) { return x * std::exp(-0.5 * x * x); }),
        1e-6);
  }
  if (wanted("dft_matrix_second")) {
    add("dft_matrix_second",
        dft_lemma_check_matrix(GridSpec(8.0, 1024),
                               [](double x) { return std::exp(-0.5 * x * x); }),
        1e-4);
  }
  if (wanted("dft_matrix_2d")) {
    add("dft_matrix_2d",
        dft_lemma_check_matrix(
            GridSpec(8.0, 128),
            [](double x, double y) {
              return std::exp(-0.5 * (x * x + 0.8 * x * y + y * y));
            }),
        1e-4);
  }

  const double aux_tols[3] = {1e-14, 1e-6, 1e-4};
  for (int order = 0; order <= 2; ++order) {
    const std::string name = "aux_lemma_check_m" + std::to_string(order);
    if (wanted(name)) add(name, check_aux(order, options.mutate_aux), aux_tols[order]);
  }

  const char* families[4] = {"trig", "rbf", "quadric", "abs"};
  for (int family = 0; family < 4; ++family) {
    const std::string name = std::string("quad_vs_analytic_") + families[family];
    if (wanted(name)) add(name, check_expectations(family), 1e-7);
  }

  if (wanted("fd_grad_mean") || wanted("fd_grad_cov") || wanted("fd_grad_scale")) {
    const FdErrors errors = check_finite_differences();
    add("fd_grad_mean", errors.mean, 1e-5);
    add("fd_grad_cov", errors.cov, 1e-5);
    add("fd_grad_scale", errors.scale, 1e-5);
  }

  if (wanted("mc_vs_analytic")) {
    const auto [diff, bound] = check_mc_consistency();
    add("mc_vs_analytic", diff, bound);
  }

  if (wanted("natural_grad_identity")) {
    add("natural_grad_identity", check_natural_grad_identity(), 1e-10);
  }
  if (wanted("natural_grad_equal_shape")) {
    add("natural_grad_equal_shape", check_natural_grad_equal_shape(), 1e-10);
  }

  return results;
}

std::string verification_csv(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  out << "check,max_error,tolerance,status\n";
  for (const CheckResult& result : results) {
    out << result.check << ',' << format_double(result.max_error) << ','
        << format_double(result.tolerance) << ','
        << (result.passed ? "pass" : "fail") << '\n';
  }
  return out.str();
}

}  // namespace fpg
