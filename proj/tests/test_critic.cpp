#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fpg/critic.hpp"
#include "fpg/rng.hpp"

using fpg::AbsAtom;
using fpg::CriticAtom;
using fpg::HybridCritic;
using fpg::Matrix;
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

// Local central-difference helpers, independent of library code.
Vector fd_grad(const CriticAtom& atom, const Vector& a, double step) {
  Vector g(a.size());
  for (int i = 0; i < a.size(); ++i) {
    Vector hi = a, lo = a;
    hi[i] += step;
    lo[i] -= step;
    g[i] = (atom_eval(atom, hi) - atom_eval(atom, lo)) / (2.0 * step);
  }
  return g;
}

Matrix fd_hessian(const CriticAtom& atom, const Vector& a, double step) {
  Matrix h(a.size(), a.size());
  for (int j = 0; j < a.size(); ++j) {
    Vector hi = a, lo = a;
    hi[j] += step;
    lo[j] -= step;
    h.col(j) = (fd_grad(atom, hi, step) - fd_grad(atom, lo, step)) / (2.0 * step);
  }
  return h;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / (std::abs(want) + 1e-8);
}

SpdFactor random_factor(int n, RngStream& rng) {
  Matrix lower = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) lower(i, j) = rng.uniform() - 0.5;
    lower(i, i) = 0.5 + rng.uniform();
  }
  return SpdFactor(std::move(lower));
}

CriticAtom random_atom(int kind, int n, RngStream& rng) {
  switch (kind) {
    case 0: {
      Vector f(n);
      for (int i = 0; i < n; ++i) f[i] = 2.0 * rng.uniform() - 1.0;
      return TrigAtom(f, 2.0 * rng.uniform() - 1.0);
    }
    case 1: {
      Vector l(n);
      for (int i = 0; i < n; ++i) l[i] = rng.uniform() - 0.5;
      return RbfAtom(l, random_factor(n, rng));
    }
    default: {
      Matrix m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform() - 0.5;
      Matrix h = 0.5 * (m + m.transpose());
      Vector c(n);
      for (int i = 0; i < n; ++i) c[i] = rng.uniform() - 0.5;
      return QuadricAtom(h, c, rng.uniform());
    }
  }
}

}  // namespace

TEST_CASE("atom evaluation closed forms") {
  CHECK(atom_eval(TrigAtom(vec1(1.0), 0.0), vec1(0.0)) == 1.0);
  CHECK(atom_eval(QuadricAtom(Matrix::Identity(1, 1), vec1(0.0), 0.0), vec1(2.0)) ==
        4.0);
  RbfAtom rbf(vec1(0.3), SpdFactor::scaled_identity(1, 0.7));
  CHECK(atom_eval(rbf, vec1(1.0)) ==
        doctest::Approx(fpg::gaussian_pdf(vec1(1.0), vec1(0.3),
                                          Matrix::Identity(1, 1) * 0.49))
            .epsilon(1e-14));
  CHECK(atom_eval(AbsAtom{}, vec1(-2.5)) == 2.5);
}

TEST_CASE("trig values stay within unit range") {
  RngStream rng(4);
  TrigAtom atom(vec1(3.7), 0.9);
  for (int i = 0; i < 200; ++i) {
    const double v = atom_eval(atom, vec1(20.0 * rng.uniform() - 10.0));
    CHECK(v <= 1.0);
    CHECK(v >= -1.0);
  }
}

TEST_CASE("hybrid evaluation is the weighted sum of atoms") {
  std::vector<CriticAtom> atoms;
  atoms.emplace_back(TrigAtom(vec1(1.0), 0.0));
  atoms.emplace_back(QuadricAtom(Matrix::Identity(1, 1), vec1(0.0), 0.0));
  HybridCritic critic(atoms, {1.0, 2.0});
  CHECK(eval(critic, vec1(M_PI)) ==
        doctest::Approx(2.0 * M_PI * M_PI - 1.0).epsilon(1e-14));
  // exact linearity
  RngStream rng(8);
  for (int i = 0; i < 20; ++i) {
    Vector a = vec1(4.0 * rng.uniform() - 2.0);
    double manual = 0.0;
    for (int k = 0; k < critic.size(); ++k) {
      manual += critic.coeffs()[k] * atom_eval(critic.atoms()[k], a);
    }
    CHECK(eval(critic, a) == manual);
  }
}

TEST_CASE("gradient closed forms") {
  CHECK(atom_grad_a(TrigAtom(vec1(1.0), 0.0), vec1(M_PI / 2.0))[0] ==
        doctest::Approx(-1.0).epsilon(1e-14));
  QuadricAtom q(Matrix::Identity(2, 2), Vector::Zero(2), 0.0);
  Vector a(2);
  a << 1.0, 2.0;
  Vector g = atom_grad_a(q, a);
  CHECK(g[0] == 2.0);
  CHECK(g[1] == 4.0);
  CHECK(atom_grad_a(AbsAtom{}, vec1(3.0))[0] == 1.0);
  CHECK(atom_grad_a(AbsAtom{}, vec1(-0.2))[0] == -1.0);
  CHECK_THROWS_AS(atom_grad_a(AbsAtom{}, vec1(0.0)), fpg::NonDifferentiableError);
  // constant critic: zero frequency has zero gradient
  CHECK(atom_grad_a(TrigAtom(vec1(0.0), 0.0), vec1(1.7))[0] == 0.0);
}

TEST_CASE("hessian closed forms") {
  QuadricAtom q(2.0 * Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  Vector a(2);
  a << -3.0, 5.0;
  CHECK(atom_hessian_a(q, a) == Matrix(4.0 * Matrix::Identity(2, 2)));
  CHECK(atom_hessian_a(TrigAtom(vec1(1.0), 0.0), vec1(0.0))(0, 0) ==
        doctest::Approx(-1.0).epsilon(1e-14));
  std::vector<CriticAtom> atoms;
  atoms.emplace_back(AbsAtom{});
  HybridCritic with_abs(atoms, {1.0});
  CHECK_THROWS_AS(hessian_a(with_abs, vec1(1.0)), fpg::UnsupportedAtomError);
}

TEST_CASE("derivatives match central finite differences at random points") {
  RngStream rng(13);
  for (int n = 1; n <= 3; ++n) {
    for (int kind = 0; kind < 3; ++kind) {
      for (int trial = 0; trial < 12; ++trial) {
        RngStream local = rng.split(100 * n + 10 * kind + trial);
        CriticAtom atom = random_atom(kind, n, local);
        Vector a(n);
        for (int i = 0; i < n; ++i) a[i] = 2.0 * local.uniform() - 1.0;
        const Vector g = atom_grad_a(atom, a);
        const Vector g_fd = fd_grad(atom, a, 1e-5);
        for (int i = 0; i < n; ++i) CHECK(rel_err(g[i], g_fd[i]) < 1e-6);
        const Matrix h = atom_hessian_a(atom, a);
        CHECK(h == Matrix(h.transpose()));
        const Matrix h_fd = fd_hessian(atom, a, 1e-4);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) CHECK(rel_err(h(i, j), h_fd(i, j)) < 1e-5);
      }
    }
  }
  // abs gradient away from the kink
  for (int trial = 0; trial < 20; ++trial) {
    double x = 3.0 * rng.uniform() - 1.5;
    if (std::abs(x) < 1e-3) x = 0.5;
    CriticAtom atom = AbsAtom{};
    CHECK(atom_grad_a(atom, vec1(x))[0] ==
          doctest::Approx(fd_grad(atom, vec1(x), 1e-5)[0]).epsilon(1e-9));
  }
}

TEST_CASE("construction validation") {
  CHECK_THROWS_AS(TrigAtom(vec1(std::nan("")), 0.0), std::invalid_argument);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(QuadricAtom(asym, Vector::Zero(2), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RbfAtom(Vector::Zero(3), SpdFactor::identity(2)),
                  fpg::DimensionError);
  std::vector<CriticAtom> atoms;
  atoms.emplace_back(TrigAtom(vec1(1.0), 0.0));
  CHECK_THROWS_AS(HybridCritic(atoms, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(HybridCritic({}, {}), std::invalid_argument);
  atoms.emplace_back(TrigAtom(Vector::Zero(2), 0.0));
  CHECK_THROWS_AS(HybridCritic(atoms, {1.0, 1.0}), fpg::DimensionError);
  CHECK_THROWS_AS(eval(HybridCritic({TrigAtom(vec1(1.0), 0.0)}, {1.0}),
                       Vector::Zero(2)),
                  fpg::DimensionError);
}

TEST_CASE("state conditioning shifts parameters without touching coefficients") {
  std::vector<CriticAtom> atoms;
  atoms.emplace_back(TrigAtom(vec1(1.0), 0.5));
  atoms.emplace_back(RbfAtom(vec1(0.0), SpdFactor::identity(1)));
  atoms.emplace_back(QuadricAtom(Matrix::Identity(1, 1), vec1(0.0), 0.0));
  atoms.emplace_back(AbsAtom{});
  HybridCritic critic(atoms, {1.0, 2.0, 3.0, 4.0});

  fpg::StateParams params;
  params.phase_offset = 0.25;
  params.center_shift = vec1(1.5);
  HybridCritic shifted = condition(critic, params);

  CHECK(shifted.coeffs() == critic.coeffs());
  CHECK(std::get<TrigAtom>(shifted.atoms()[0]).phase == 0.75);
  CHECK(std::get<RbfAtom>(shifted.atoms()[1]).loc[0] == 1.5);
  CHECK(std::get<QuadricAtom>(shifted.atoms()[2]).center[0] == 1.5);
  // empty shift leaves centers alone
  fpg::StateParams phase_only;
  phase_only.phase_offset = -0.1;
  HybridCritic p = condition(critic, phase_only);
  CHECK(std::get<RbfAtom>(p.atoms()[1]).loc[0] == 0.0);
}

TEST_CASE("fourier fit recovers orthogonal components") {
  const double L = M_PI;
  const double w0 = M_PI / L;
  auto fitted = fpg::fit_fourier_series(
      [&](double x) { return std::cos(w0 * x); }, L, 1);
  REQUIRE(fitted.size() == 3);  // constant, cos(1), sin(1)
  CHECK(std::abs(fitted.coeffs()[0]) < 1e-10);
  CHECK(fitted.coeffs()[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(fitted.coeffs()[2]) < 1e-10);
  // the sin atom really is a phase-(pi/2) cosine
  const auto& sin_atom = std::get<TrigAtom>(fitted.atoms()[2]);
  CHECK(sin_atom.phase == doctest::Approx(M_PI / 2.0));
  CHECK(sin_atom.freq[0] == doctest::Approx(w0));
}

TEST_CASE("fourier fit reproduces constants") {
  auto fitted = fpg::fit_fourier_series([](double) { return 3.0; }, 2.0, 0);
  REQUIRE(fitted.size() == 1);
  CHECK(eval(fitted, vec1(0.77)) == doctest::Approx(3.0).epsilon(1e-12));
  const auto& atom = std::get<TrigAtom>(fitted.atoms()[0]);
  CHECK(atom.freq[0] == 0.0);
  CHECK(atom.phase == 0.0);
}

TEST_CASE("fourier reconstruction error shrinks with order") {
  auto target = [](double x) { return x; };  // sawtooth on [-pi, pi]
  const double L = M_PI;
  auto interior_max_error = [&](const HybridCritic& critic) {
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double x = -0.8 * L + 1.6 * L * i / 400.0;
      worst = std::max(worst, std::abs(eval(critic, vec1(x)) - target(x)));
    }
    return worst;
  };
  const double e5 = interior_max_error(fpg::fit_fourier_series(target, L, 5));
  const double e10 = interior_max_error(fpg::fit_fourier_series(target, L, 10));
  CHECK(e10 < e5);

  // smooth periodic target: monotone decrease across orders
  auto smooth = [](double x) { return std::exp(std::sin(x)); };
  double prev = std::numeric_limits<double>::infinity();
  for (int order : {2, 5, 10, 20}) {
    const double err = [&] {
      auto critic = fpg::fit_fourier_series(smooth, L, order);
      double worst = 0.0;
      for (int i = 0; i <= 400; ++i) {
        const double x = -L + 2.0 * L * i / 400.0;
        worst = std::max(worst, std::abs(eval(critic, vec1(x)) - smooth(x)));
      }
      return worst;
    }();
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("fourier fit rejects non-finite targets") {
  CHECK_THROWS_AS(fpg::fit_fourier_series(
                      [](double x) { return 1.0 / x; }, 1.0, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(fpg::fit_fourier_series([](double) { return 0.0; }, -1.0, 2),
                  std::invalid_argument);
}

TEST_CASE("sarsa update rule") {
  std::vector<CriticAtom> atoms;
  atoms.emplace_back(TrigAtom(vec1(0.0), 0.0));  // feature identically 1
  HybridCritic critic(atoms, {0.0});
  fpg::StateParams none;

  // zero TD error: r chosen so delta = 0
  HybridCritic same =
      sarsa_update(critic, none, vec1(0.3), 0.0, vec1(0.1), none, 0.1, 0.9);
  CHECK(same.coeffs()[0] == 0.0);

  // unit TD error with gamma = 0: coefficient moves by alpha
  HybridCritic bumped =
      sarsa_update(critic, none, vec1(0.3), 1.0, vec1(0.1), none, 0.1, 0.0);
  CHECK(bumped.coeffs()[0] == doctest::Approx(0.1).epsilon(1e-15));

  CHECK_THROWS_AS(
      sarsa_update(critic, none, vec1(0.0), 0.0, vec1(0.0), none, 0.0, 0.5),
      std::invalid_argument);
  CHECK_THROWS_AS(
      sarsa_update(critic, none, vec1(0.0), 0.0, vec1(0.0), none, 1.5, 0.5),
      std::invalid_argument);
  CHECK_THROWS_AS(
      sarsa_update(critic, none, vec1(0.0), 0.0, vec1(0.0), none, 0.1, 1.0),
      std::invalid_argument);
}

TEST_CASE("sarsa drives TD error toward a representable fixed point") {
  // Reward constructed so that coefficients (1, -0.25) give zero TD error.
  const double gamma = 0.9;
  const double c_true = 1.0;
  const double w_true = -0.25;
  auto q_true = [&](double phi, double a) {
    return c_true * std::sin(phi + a) + w_true * std::abs(a);
  };

  std::vector<CriticAtom> atoms;
  atoms.emplace_back(TrigAtom(vec1(1.0), M_PI / 2.0));  // sin(a + offset path)
  atoms.emplace_back(AbsAtom{});
  HybridCritic critic(atoms, {0.5, 0.1});

  struct Transition {
    fpg::StateParams s, s_next;
    Vector a, a_next;
    double r;
  };
  RngStream rng(77);
  std::vector<Transition> data;
  for (int i = 0; i < 100; ++i) {
    const double phi = 2.0 * M_PI * rng.uniform() - M_PI;
    const double phi_next = 2.0 * M_PI * rng.uniform() - M_PI;
    const double a = 2.0 * M_PI * rng.uniform() - M_PI;
    const double a_next = 2.0 * M_PI * rng.uniform() - M_PI;
    Transition t;
    t.s.phase_offset = -phi;  // effective phase pi/2 - phi: cos(a - pi/2 + phi)
    t.s_next.phase_offset = -phi_next;
    t.a = vec1(a);
    t.a_next = vec1(a_next);
    t.r = q_true(phi, a) - gamma * q_true(phi_next, a_next);
    data.push_back(t);
  }

  auto sweep_abs_delta = [&](const HybridCritic& c) {
    double total = 0.0;
    for (const auto& t : data) {
      const double q = eval(condition(c, t.s), t.a);
      const double qn = eval(condition(c, t.s_next), t.a_next);
      total += std::abs(t.r + gamma * qn - q);
    }
    return total / data.size();
  };

  const double initial = sweep_abs_delta(critic);
  REQUIRE(initial > 0.05);
  int updates = 0;
  HybridCritic learned = critic;
  while (updates < 5000 && sweep_abs_delta(learned) > 0.1 * initial) {
    for (const auto& t : data) {
      learned = sarsa_update(learned, t.s, t.a, t.r, t.a_next, t.s_next, 0.05, gamma);
      ++updates;
    }
  }
  CHECK(sweep_abs_delta(learned) <= 0.1 * initial);
  CHECK(updates < 5000);
  // shapes untouched
  CHECK(std::get<TrigAtom>(learned.atoms()[0]).phase == M_PI / 2.0);
}
