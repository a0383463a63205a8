#pragma once

#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fpg/linalg.hpp"

namespace fpg {

// Requesting a derivative at a point where it does not exist (|a| at 0).
class NonDifferentiableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requesting an operation an atom cannot supply (second derivative of |a|).
class UnsupportedAtomError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// cos(freq . a - phase)
struct TrigAtom {
  Vector freq;
  double phase = 0.0;

  TrigAtom(Vector freq_in, double phase_in);
  int dim() const { return static_cast<int>(freq.size()); }
};

// Normal density N(a; loc, S) with S = shape^T shape.
struct RbfAtom {
  Vector loc;
  SpdFactor shape;

  RbfAtom(Vector loc_in, SpdFactor shape_in);
  int dim() const { return static_cast<int>(loc.size()); }
};

// (a - center)^T H (a - center) + offset with symmetric H.
struct QuadricAtom {
  Matrix h_matrix;
  Vector center;
  double offset = 0.0;

  QuadricAtom(Matrix h_in, Vector center_in, double offset_in);
  int dim() const { return static_cast<int>(center.size()); }
};

// |a| on a one-dimensional action space.
struct AbsAtom {
  int dim() const { return 1; }
};

using CriticAtom = std::variant<TrigAtom, RbfAtom, QuadricAtom, AbsAtom>;

int atom_dim(const CriticAtom& atom);

double atom_eval(const CriticAtom& atom, const Vector& a);
Vector atom_grad_a(const CriticAtom& atom, const Vector& a);
Matrix atom_hessian_a(const CriticAtom& atom, const Vector& a);

// Immutable weighted combination of atoms; coefficients are the learnable
// parameters, atom shapes are fixed.
class HybridCritic {
 public:
  HybridCritic(std::vector<CriticAtom> atoms, std::vector<double> coeffs);

  const std::vector<CriticAtom>& atoms() const { return atoms_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  int size() const { return static_cast<int>(atoms_.size()); }
  int dim() const { return atom_dim(atoms_.front()); }

  HybridCritic with_coeffs(std::vector<double> coeffs) const;

 private:
  std::vector<CriticAtom> atoms_;
  std::vector<double> coeffs_;
};

double eval(const HybridCritic& critic, const Vector& a);
Vector grad_a(const HybridCritic& critic, const Vector& a);
Matrix hessian_a(const HybridCritic& critic, const Vector& a);

// State conditioning: shifts applied to atom parameters at call time. The
// phase offset is added to every trig phase; the center shift is added to rbf
// locations and quadric centers. Abs atoms are unaffected.
struct StateParams {
  double phase_offset = 0.0;
  Vector center_shift;  // empty = no shift
};

HybridCritic condition(const HybridCritic& critic, const StateParams& params);

// Truncated trigonometric series fit of a scalar target on [-L, L] by
// composite-Simpson quadrature; the constant term is stored halved so the
// returned critic evaluates directly to the partial sum.
HybridCritic fit_fourier_series(const std::function<double(double)>& target,
                                double half_period, int order);

// Semi-gradient temporal-difference update of the coefficients only; returns
// a new critic with identical atoms.
HybridCritic sarsa_update(const HybridCritic& critic, const StateParams& s_params,
                          const Vector& a, double r, const Vector& a_next,
                          const StateParams& next_params, double alpha, double gamma);

}  // namespace fpg
