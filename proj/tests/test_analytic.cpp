#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fpg/analytic.hpp"
#include "fpg/oracle.hpp"
#include "fpg/rng.hpp"

using fpg::AbsAtom;
using fpg::CriticAtom;
using fpg::GaussianPolicy;
using fpg::GradientUpdate;
using fpg::HybridCritic;
using fpg::Matrix;
using fpg::MixturePolicy;
using fpg::PolicyComponent;
using fpg::QuadricAtom;
using fpg::RbfAtom;
using fpg::RngStream;
using fpg::SpdFactor;
using fpg::TrigAtom;
using fpg::Vector;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / (std::abs(want) + 1e-8);
}

SpdFactor random_factor(int n, RngStream& rng) {
  Matrix lower = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) lower(i, j) = rng.uniform() - 0.5;
    lower(i, i) = 0.4 + rng.uniform();
  }
  return SpdFactor(std::move(lower));
}

GaussianPolicy random_policy(int n, RngStream& rng) {
  Vector mu(n);
  for (int i = 0; i < n; ++i) mu[i] = 2.0 * rng.uniform() - 1.0;
  return GaussianPolicy(mu, random_factor(n, rng));
}

CriticAtom random_atom(int kind, int n, RngStream& rng) {
  switch (kind) {
    case 0: {
      Vector f(n);
      for (int i = 0; i < n; ++i) f[i] = 3.0 * rng.uniform() - 1.5;
      return TrigAtom(f, 2.0 * rng.uniform() - 1.0);
    }
    case 1: {
      Vector l(n);
      for (int i = 0; i < n; ++i) l[i] = 2.0 * rng.uniform() - 1.0;
      return RbfAtom(l, random_factor(n, rng));
    }
    case 2: {
      Matrix m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform() - 0.5;
      Matrix h = 0.5 * (m + m.transpose());
      Vector c(n);
      for (int i = 0; i < n; ++i) c[i] = rng.uniform() - 0.5;
      return QuadricAtom(h, c, rng.uniform() - 0.5);
    }
    default:
      return AbsAtom{};
  }
}

// Expectation as a function of the mean (for finite differences).
double e_of_mean(const CriticAtom& atom, const GaussianPolicy& policy,
                 const Vector& mu) {
  return atom_expectation(atom, GaussianPolicy(mu, policy.scale));
}

// Expectation as a function of the covariance matrix.
double e_of_cov(const CriticAtom& atom, const GaussianPolicy& policy,
                const Matrix& sigma) {
  return atom_expectation(atom, GaussianPolicy(policy.mean, SpdFactor::from_spd(sigma)));
}

// Expectation as a function of a general covariance factor A (cov = A^T A).
double e_of_factor(const CriticAtom& atom, const GaussianPolicy& policy,
                   const Matrix& a_mat) {
  const Matrix sigma = a_mat.transpose() * a_mat;
  return atom_expectation(atom, GaussianPolicy(policy.mean, SpdFactor::from_spd(sigma)));
}

}  // namespace

TEST_CASE("expectation closed-form anchor values") {
  RngStream rng(2);
  GaussianPolicy any = random_policy(3, rng);
  CHECK(atom_expectation(TrigAtom(Vector::Zero(3), 0.0), any) == 1.0);

  GaussianPolicy unit1(vec1(0.7), SpdFactor::identity(1));
  CHECK(atom_expectation(QuadricAtom(Matrix::Identity(1, 1), vec1(0.7), 0.0), unit1) ==
        doctest::Approx(1.0).epsilon(1e-14));

  GaussianPolicy half(vec1(0.3), SpdFactor::scaled_identity(1, std::sqrt(0.5)));
  RbfAtom rbf(vec1(0.3), SpdFactor::scaled_identity(1, std::sqrt(0.5)));
  CHECK(atom_expectation(rbf, half) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-12));

  GaussianPolicy std1(vec1(0.0), SpdFactor::identity(1));
  CHECK(atom_expectation(AbsAtom{}, std1) ==
        doctest::Approx(0.7978845608028654).epsilon(1e-12));
}

namespace {

// Relative error with a floor above the quadrature's accumulated roundoff so
// near-zero crossings of the expectation compare absolutely.
double quad_rel(double got, double want) {
  return std::abs(got - want) / (std::abs(want) + 1e-6);
}

// Atom the tensor Gauss-Hermite rule can resolve under the given policy: rbf
// kernels are broadened to at least the policy covariance so the whitened
// bump stays wider than the node spacing; trig/quadric need no restriction.
CriticAtom quadrature_atom(int kind, int n, const GaussianPolicy& policy,
                           RngStream& rng) {
  if (kind == 1) {
    const Matrix broad =
        spd_from_factor(random_factor(n, rng)) + spd_from_factor(policy.scale);
    Vector l(n);
    for (int i = 0; i < n; ++i) l[i] = 2.0 * rng.uniform() - 1.0;
    return RbfAtom(l, SpdFactor::from_spd(broad));
  }
  return random_atom(kind, n, rng);
}

// Joint draw; abs additionally needs the mean 5-7 sigma from the kink so the
// folded-tail contribution sits below 1e-8 relative.
std::pair<CriticAtom, GaussianPolicy> quadrature_instance(int kind, int n,
                                                          RngStream& rng) {
  GaussianPolicy policy = random_policy(n, rng);
  if (kind == 3) {
    const double sigma = policy.scale.lower()(0, 0);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const Vector mu = vec1(sign * (5.0 + 2.0 * rng.uniform()) * sigma);
    return {AbsAtom{}, GaussianPolicy(mu, policy.scale)};
  }
  CriticAtom atom = quadrature_atom(kind, n, policy, rng);
  return {std::move(atom), std::move(policy)};
}

}  // namespace

TEST_CASE("expectation matches quadrature across families and dimensions") {
  RngStream rng(31);
  for (int n = 1; n <= 3; ++n) {
    for (int kind = 0; kind < 4; ++kind) {
      if (kind == 3 && n != 1) continue;
      for (int trial = 0; trial < 8; ++trial) {
        RngStream local = rng.split(1000 * n + 100 * kind + trial);
        const auto [atom, policy] = quadrature_instance(kind, n, local);
        const HybridCritic single({atom}, {1.0});
        const double quad =
            quad_expectation(single, policy, fpg::QuadratureSpec(40, n));
        CHECK(quad_rel(atom_expectation(atom, policy), quad) < 1e-7);
      }
    }
  }
}

TEST_CASE("mean gradient closed forms and finite differences") {
  RngStream rng(5);
  CHECK(atom_grad_mean(TrigAtom(Vector::Zero(2), 0.3), random_policy(2, rng)) ==
        Vector(Vector::Zero(2)));
  GaussianPolicy p = random_policy(2, rng);
  RbfAtom peaked(p.mean, random_factor(2, rng));
  CHECK(atom_grad_mean(peaked, p).cwiseAbs().maxCoeff() == 0.0);

  for (int n = 1; n <= 3; ++n) {
    for (int kind = 0; kind < 4; ++kind) {
      if (kind == 3 && n != 1) continue;
      for (int trial = 0; trial < 6; ++trial) {
        RngStream local = rng.split(700 * n + 70 * kind + trial);
        const CriticAtom atom = random_atom(kind, n, local);
        const GaussianPolicy policy = random_policy(n, local);
        const Vector analytic = atom_grad_mean(atom, policy);
        const Vector fd = fpg::finite_diff(
            [&](const Vector& mu) { return e_of_mean(atom, policy, mu); },
            policy.mean, 1e-5);
        for (int i = 0; i < n; ++i) CHECK(rel_err(analytic[i], fd[i]) < 1e-5);
      }
    }
  }
}

TEST_CASE("trig mean gradient meets the tighter finite-difference bound") {
  RngStream rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    RngStream local = rng.split(trial);
    const CriticAtom atom = random_atom(0, 2, local);
    const GaussianPolicy policy = random_policy(2, local);
    const Vector analytic = atom_grad_mean(atom, policy);
    const Vector fd = fpg::finite_diff(
        [&](const Vector& mu) { return e_of_mean(atom, policy, mu); }, policy.mean,
        1e-5);
    for (int i = 0; i < 2; ++i) CHECK(rel_err(analytic[i], fd[i]) < 1e-6);
  }
}

TEST_CASE("covariance gradient closed forms and finite differences") {
  RngStream rng(9);
  // quadric: exactly H, independent of policy
  for (int trial = 0; trial < 5; ++trial) {
    RngStream local = rng.split(trial);
    const CriticAtom atom = random_atom(2, 2, local);
    const GaussianPolicy policy = random_policy(2, local);
    CHECK(atom_grad_cov(atom, policy) == std::get<QuadricAtom>(atom).h_matrix);
  }
  // trig with the cosine at a zero crossing
  {
    Vector f(2);
    f << 0.7, -0.4;
    GaussianPolicy policy = random_policy(2, rng);
    const double h = f.dot(policy.mean) - M_PI / 2.0;
    const TrigAtom atom(f, h);
    CHECK(atom_grad_cov(atom, policy).cwiseAbs().maxCoeff() < 1e-15);
  }
  // all families against symmetrized finite differences over the covariance
  for (int n = 1; n <= 3; ++n) {
    for (int kind = 0; kind < 4; ++kind) {
      if (kind == 3 && n != 1) continue;
      for (int trial = 0; trial < 5; ++trial) {
        RngStream local = rng.split(900 * n + 90 * kind + trial);
        const CriticAtom atom = random_atom(kind, n, local);
        const GaussianPolicy policy = random_policy(n, local);
        const Matrix analytic = atom_grad_cov(atom, policy);
        CHECK(analytic == Matrix(analytic.transpose()));
        const Matrix sigma = spd_from_factor(policy.scale);
        const Matrix fd = fpg::finite_diff_matrix(
            [&](const Matrix& s) { return e_of_cov(atom, policy, s); }, sigma, 1e-4,
            /*symmetrize=*/true);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) CHECK(rel_err(analytic(i, j), fd(i, j)) < 1e-5);
      }
    }
  }
}

TEST_CASE("scale gradient is the chain-rule image of the covariance gradient") {
  RngStream rng(14);
  // identity factor: exactly twice the covariance gradient
  {
    GaussianPolicy policy(vec1(0.2), SpdFactor::identity(1));
    const CriticAtom atom = random_atom(0, 1, rng);
    CHECK(atom_grad_scale(atom, policy) == Matrix(2.0 * atom_grad_cov(atom, policy)));
  }
  {
    Matrix h(2, 2);
    h << 0.8, 0.1, 0.1, -0.3;
    QuadricAtom atom(h, Vector::Zero(2), 0.0);
    GaussianPolicy policy(Vector::Zero(2), SpdFactor::identity(2));
    CHECK(atom_grad_scale(atom, policy) == Matrix(2.0 * h));
  }
  // finite differences over an unconstrained factor
  for (int n = 1; n <= 3; ++n) {
    for (int kind = 0; kind < 4; ++kind) {
      if (kind == 3 && n != 1) continue;
      for (int trial = 0; trial < 4; ++trial) {
        RngStream local = rng.split(800 * n + 80 * kind + trial);
        const CriticAtom atom = random_atom(kind, n, local);
        const GaussianPolicy policy = random_policy(n, local);
        const Matrix analytic = atom_grad_scale(atom, policy);
        const Matrix fd = fpg::finite_diff_matrix(
            [&](const Matrix& a_mat) { return e_of_factor(atom, policy, a_mat); },
            policy.scale.lower(), 1e-5, /*symmetrize=*/false);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) CHECK(rel_err(analytic(i, j), fd(i, j)) < 1e-5);
      }
    }
  }
}

TEST_CASE("trig damping is monotone in the covariance scale") {
  Vector f(2);
  f << 1.1, -0.6;
  const TrigAtom atom(f, 0.4);
  Vector mu(2);
  mu << 0.3, 0.9;
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    GaussianPolicy policy(mu, SpdFactor::scaled_identity(2, std::sqrt(t)));
    const double e = std::abs(atom_expectation(atom, policy));
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("negative-definite quadric mean gradient points at the center") {
  RngStream rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    RngStream local = rng.split(trial);
    Matrix m(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = local.uniform() - 0.5;
    const Matrix nd = -(m * m.transpose() + 0.1 * Matrix::Identity(2, 2));
    Vector l(2), mu(2);
    for (int i = 0; i < 2; ++i) {
      l[i] = local.uniform() - 0.5;
      mu[i] = l[i] + local.uniform() + 0.1;
    }
    QuadricAtom atom(nd, l, 0.0);
    GaussianPolicy policy(mu, random_factor(2, local));
    const Vector g = atom_grad_mean(atom, policy);
    CHECK(g.dot(l - mu) > 0.0);
  }
}

TEST_CASE("hybrid gradient composes linearly") {
  RngStream rng(40);
  const GaussianPolicy policy = random_policy(2, rng);
  std::vector<CriticAtom> atoms;
  std::vector<double> coeffs;
  for (int kind : {0, 1, 2, 0, 1}) {
    atoms.push_back(quadrature_atom(kind, 2, policy, rng));
    coeffs.push_back(2.0 * rng.uniform() - 1.0);
  }
  HybridCritic critic(atoms, coeffs);

  auto [update, coeff_grads] = hybrid_gradient(critic, policy);
  REQUIRE(coeff_grads.size() == atoms.size());

  // singleton equals the atom's own update
  auto [single, single_grads] = hybrid_gradient(HybridCritic({atoms[0]}, {1.0}), policy);
  const GradientUpdate direct = atom_gradient(atoms[0], policy);
  CHECK(single.expectation == direct.expectation);
  CHECK(*single.grad_mean == *direct.grad_mean);
  CHECK(single.grad_cov == direct.grad_cov);
  CHECK(single_grads[0] == direct.expectation);

  // manual sum, same order: 1-ulp agreement
  double e = 0.0;
  Vector gm = Vector::Zero(2);
  Matrix gc = Matrix::Zero(2, 2);
  for (size_t i = 0; i < atoms.size(); ++i) {
    const GradientUpdate part = atom_gradient(atoms[i], policy);
    e += coeffs[i] * part.expectation;
    gm += coeffs[i] * *part.grad_mean;
    gc += coeffs[i] * part.grad_cov;
    CHECK(coeff_grads[i] == part.expectation);
  }
  CHECK(update.expectation == doctest::Approx(e).epsilon(1e-14));
  CHECK((*update.grad_mean - gm).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((update.grad_cov - gc).cwiseAbs().maxCoeff() < 1e-14);

  // doubling the coefficients doubles everything
  std::vector<double> doubled = coeffs;
  for (double& c : doubled) c *= 2.0;
  auto [twice, twice_grads] = hybrid_gradient(critic.with_coeffs(doubled), policy);
  CHECK(twice.expectation == doctest::Approx(2.0 * update.expectation).epsilon(1e-14));
  CHECK((*twice.grad_mean - 2.0 * *update.grad_mean).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((twice.grad_cov - 2.0 * update.grad_cov).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(twice_grads == coeff_grads);  // expectations of atoms are coefficient-free

  // hybrid expectation against quadrature
  const double quad = quad_expectation(critic, policy, fpg::QuadratureSpec(40, 2));
  CHECK(quad_rel(update.expectation, quad) < 1e-7);
}

TEST_CASE("mixture gradient decomposes into components") {
  RngStream rng(50);
  const GaussianPolicy g = random_policy(2, rng);
  std::vector<CriticAtom> atoms;
  for (int kind : {0, 1, 2}) atoms.push_back(random_atom(kind, 2, rng));
  HybridCritic critic(atoms, {0.7, -0.2, 0.4});

  // weight-1 Gaussian mixture equals the hybrid gradient
  MixturePolicy degenerate({1.0}, {PolicyComponent(g)});
  const auto mix = mixture_gradient(critic, degenerate);
  const auto [update, coeff_grads] = hybrid_gradient(critic, g);
  REQUIRE(mix.per_component.size() == 1);
  CHECK(mix.per_component[0].expectation == update.expectation);
  CHECK(*mix.per_component[0].grad_mean == *update.grad_mean);
  CHECK(mix.per_component[0].grad_cov == update.grad_cov);
  CHECK(mix.weight_grads[0] == update.expectation);

  // weight-1 Dirac sifts the critic
  Vector a0(2);
  a0 << 0.4, -0.9;
  MixturePolicy point({1.0}, {PolicyComponent(fpg::DiracPolicy(a0))});
  const auto sift = mixture_gradient(critic, point);
  CHECK(sift.weight_grads[0] == eval(critic, a0));
  CHECK(*sift.per_component[0].grad_mean == grad_a(critic, a0));
  CHECK(sift.per_component[0].grad_cov == Matrix(Matrix::Zero(2, 2)));

  // two-component expectation against Monte Carlo
  const GaussianPolicy g2 = random_policy(2, rng);
  MixturePolicy two({0.35, 0.65}, {PolicyComponent(g), PolicyComponent(g2)});
  const auto parts = mixture_gradient(critic, two);
  const double total = 0.35 * parts.weight_grads[0] + 0.65 * parts.weight_grads[1];
  RngStream mc_rng(777);
  const auto [mc_mean, mc_se] = mc_expectation(critic, two, 1000000, mc_rng);
  CHECK(std::abs(total - mc_mean) < 3.0 * mc_se);
}

TEST_CASE("rbf natural gradient direction") {
  RngStream rng(60);
  // at the peak: zero
  {
    const GaussianPolicy policy = random_policy(2, rng);
    RbfAtom atom(policy.mean, random_factor(2, rng));
    CHECK(rbf_natural_grad_mean(atom, policy).cwiseAbs().maxCoeff() == 0.0);
  }
  // S = Sigma: reduces to -(mu - l)/4
  {
    const GaussianPolicy policy = random_policy(2, rng);
    Vector l(2);
    l << -0.3, 0.8;
    RbfAtom atom(l, policy.scale);
    const Vector g = rbf_natural_grad_mean(atom, policy);
    const Vector want = -0.25 * (policy.mean - l);
    CHECK((g - want).cwiseAbs().maxCoeff() < 1e-12);
  }
  // algebraic identity against the convolved-covariance route
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      RngStream local = rng.split(10 * n + trial);
      const GaussianPolicy policy = random_policy(n, local);
      Vector l(n);
      for (int i = 0; i < n; ++i) l[i] = 2.0 * local.uniform() - 1.0;
      RbfAtom atom(l, random_factor(n, local));
      const Vector direct = rbf_natural_grad_mean(atom, policy);
      // Sigma (Sigma + S)^-1 v route through the closed-form mean gradient
      const Matrix sigma = spd_from_factor(policy.scale);
      const double e = atom_expectation(atom, policy);
      const Vector via_grad = 0.5 * (sigma * atom_grad_mean(atom, policy)) / e;
      CHECK((direct - via_grad).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("dimension validation") {
  RngStream rng(70);
  const GaussianPolicy p2 = random_policy(2, rng);
  CHECK_THROWS_AS(atom_expectation(TrigAtom(Vector::Zero(3), 0.0), p2),
                  fpg::DimensionError);
  CHECK_THROWS_AS(atom_expectation(AbsAtom{}, p2), fpg::DimensionError);
  CHECK_THROWS_AS(atom_grad_mean(AbsAtom{}, p2), fpg::DimensionError);
}
