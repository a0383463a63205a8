#include "fpg/critic.hpp"

#include <cmath>

namespace fpg {

namespace {

void require_dim(const CriticAtom& atom, const Vector& a) {
  if (atom_dim(atom) != a.size()) {
    throw DimensionError("critic: action dimension mismatch");
  }
}

}  // namespace

TrigAtom::TrigAtom(Vector freq_in, double phase_in)
    : freq(std::move(freq_in)), phase(phase_in) {
  if (freq.size() < 1 || !freq.allFinite() || !std::isfinite(phase)) {
    throw std::invalid_argument("TrigAtom: freq and phase must be finite");
  }
}

RbfAtom::RbfAtom(Vector loc_in, SpdFactor shape_in)
    : loc(std::move(loc_in)), shape(std::move(shape_in)) {
  if (loc.size() != shape.dim()) {
    throw DimensionError("RbfAtom: loc and shape dimensions differ");
  }
  if (!loc.allFinite()) throw std::invalid_argument("RbfAtom: non-finite loc");
}

QuadricAtom::QuadricAtom(Matrix h_in, Vector center_in, double offset_in)
    : h_matrix(std::move(h_in)), center(std::move(center_in)), offset(offset_in) {
  if (h_matrix.rows() != h_matrix.cols() || h_matrix.rows() != center.size()) {
    throw DimensionError("QuadricAtom: H and center dimensions differ");
  }
  if (!h_matrix.allFinite() || !center.allFinite() || !std::isfinite(offset)) {
    throw std::invalid_argument("QuadricAtom: parameters must be finite");
  }
  if (h_matrix != h_matrix.transpose().eval()) {
    throw std::invalid_argument("QuadricAtom: H must be symmetric entrywise");
  }
}

int atom_dim(const CriticAtom& atom) {
  return std::visit([](const auto& x) { return x.dim(); }, atom);
}

double atom_eval(const CriticAtom& atom, const Vector& a) {
  require_dim(atom, a);
  return std::visit(
      [&a](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrigAtom>) {
          return std::cos(x.freq.dot(a) - x.phase);
        } else if constexpr (std::is_same_v<T, RbfAtom>) {
          return gaussian_pdf(a, x.loc, x.shape);
        } else if constexpr (std::is_same_v<T, QuadricAtom>) {
          const Vector d = a - x.center;
          return d.dot(x.h_matrix * d) + x.offset;
        } else {
          return std::abs(a[0]);
        }
      },
      atom);
}

Vector atom_grad_a(const CriticAtom& atom, const Vector& a) {
  require_dim(atom, a);
  return std::visit(
      [&a](const auto& x) -> Vector {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrigAtom>) {
          return -std::sin(x.freq.dot(a) - x.phase) * x.freq;
        } else if constexpr (std::is_same_v<T, RbfAtom>) {
          const double value = gaussian_pdf(a, x.loc, x.shape);
          return -value * x.shape.solve(a - x.loc);
        } else if constexpr (std::is_same_v<T, QuadricAtom>) {
          return 2.0 * (x.h_matrix * (a - x.center));
        } else {
          if (a[0] == 0.0) {
            throw NonDifferentiableError("AbsAtom: gradient undefined at 0");
          }
          Vector g(1);
          g[0] = a[0] > 0.0 ? 1.0 : -1.0;
          return g;
        }
      },
      atom);
}

Matrix atom_hessian_a(const CriticAtom& atom, const Vector& a) {
  require_dim(atom, a);
  return std::visit(
      [&a](const auto& x) -> Matrix {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrigAtom>) {
          // Materialize the outer product before scaling so the result is
          // exactly symmetric (scaling one factor first breaks that).
          const Matrix outer = x.freq * x.freq.transpose();
          return -std::cos(x.freq.dot(a) - x.phase) * outer;
        } else if constexpr (std::is_same_v<T, RbfAtom>) {
          const double value = gaussian_pdf(a, x.loc, x.shape);
          const Vector u = x.shape.solve(a - x.loc);
          return value * (u * u.transpose() - x.shape.inverse());
        } else if constexpr (std::is_same_v<T, QuadricAtom>) {
          return 2.0 * x.h_matrix;
        } else {
          throw UnsupportedAtomError("AbsAtom: second derivative is not a function");
        }
      },
      atom);
}

HybridCritic::HybridCritic(std::vector<CriticAtom> atoms, std::vector<double> coeffs)
    : atoms_(std::move(atoms)), coeffs_(std::move(coeffs)) {
  if (atoms_.empty() || atoms_.size() != coeffs_.size()) {
    throw std::invalid_argument("HybridCritic: need matching, nonempty atoms/coeffs");
  }
  const int n = atom_dim(atoms_.front());
  for (const auto& atom : atoms_) {
    if (atom_dim(atom) != n) {
      throw DimensionError("HybridCritic: atoms must share the action dimension");
    }
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c)) {
      throw std::invalid_argument("HybridCritic: non-finite coefficient");
    }
  }
}

HybridCritic HybridCritic::with_coeffs(std::vector<double> coeffs) const {
  return HybridCritic(atoms_, std::move(coeffs));
}

double eval(const HybridCritic& critic, const Vector& a) {
  double total = 0.0;
  for (int i = 0; i < critic.size(); ++i) {
    total += critic.coeffs()[i] * atom_eval(critic.atoms()[i], a);
  }
  return total;
}

Vector grad_a(const HybridCritic& critic, const Vector& a) {
  Vector total = Vector::Zero(critic.dim());
  for (int i = 0; i < critic.size(); ++i) {
    total += critic.coeffs()[i] * atom_grad_a(critic.atoms()[i], a);
  }
  return total;
}

Matrix hessian_a(const HybridCritic& critic, const Vector& a) {
  Matrix total = Matrix::Zero(critic.dim(), critic.dim());
  for (int i = 0; i < critic.size(); ++i) {
    total += critic.coeffs()[i] * atom_hessian_a(critic.atoms()[i], a);
  }
  return total;
}

HybridCritic condition(const HybridCritic& critic, const StateParams& params) {
  if (params.center_shift.size() != 0 && params.center_shift.size() != critic.dim()) {
    throw DimensionError("condition: center_shift dimension mismatch");
  }
  std::vector<CriticAtom> atoms;
  atoms.reserve(critic.atoms().size());
  for (const auto& atom : critic.atoms()) {
    atoms.push_back(std::visit(
        [&params](const auto& x) -> CriticAtom {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, TrigAtom>) {
            return TrigAtom(x.freq, x.phase + params.phase_offset);
          } else if constexpr (std::is_same_v<T, RbfAtom>) {
            if (params.center_shift.size() == 0) return x;
            return RbfAtom(x.loc + params.center_shift, x.shape);
          } else if constexpr (std::is_same_v<T, QuadricAtom>) {
            if (params.center_shift.size() == 0) return x;
            return QuadricAtom(x.h_matrix, x.center + params.center_shift, x.offset);
          } else {
            return x;
          }
        },
        atom));
  }
  return HybridCritic(std::move(atoms), critic.coeffs());
}

namespace {

// Composite Simpson on [-L, L] with an even, fixed interval count.
double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double y = f(x);
    if (!std::isfinite(y)) {
      throw std::invalid_argument("fit_fourier_series: non-finite target sample");
    }
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    total += w * y;
  }
  return total * h / 3.0;
}

constexpr int kSimpsonIntervals = 8192;

}  // namespace

HybridCritic fit_fourier_series(const std::function<double(double)>& target,
                                double half_period, int order) {
  if (!(half_period > 0.0) || order < 0) {
    throw std::invalid_argument("fit_fourier_series: need L > 0 and order >= 0");
  }
  const double L = half_period;
  const double omega0 = M_PI / L;

  std::vector<CriticAtom> atoms;
  std::vector<double> coeffs;
  Vector zero_freq(1);
  zero_freq[0] = 0.0;
  const double u0 =
      simpson([&](double x) { return target(x); }, -L, L, kSimpsonIntervals) / L;
  atoms.emplace_back(TrigAtom(zero_freq, 0.0));
  coeffs.push_back(0.5 * u0);

  for (int m = 1; m <= order; ++m) {
    const double w = m * omega0;
    Vector freq(1);
    freq[0] = w;
    const double um =
        simpson([&](double x) { return target(x) * std::cos(w * x); }, -L, L,
                kSimpsonIntervals) /
        L;
    const double vm =
        simpson([&](double x) { return target(x) * std::sin(w * x); }, -L, L,
                kSimpsonIntervals) /
        L;
    atoms.emplace_back(TrigAtom(freq, 0.0));
    coeffs.push_back(um);
    atoms.emplace_back(TrigAtom(freq, M_PI / 2.0));
    coeffs.push_back(vm);
  }
  return HybridCritic(std::move(atoms), std::move(coeffs));
}

HybridCritic sarsa_update(const HybridCritic& critic, const StateParams& s_params,
                          const Vector& a, double r, const Vector& a_next,
                          const StateParams& next_params, double alpha, double gamma) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("sarsa_update: alpha must lie in (0, 1]");
  }
  if (!(gamma >= 0.0) || gamma >= 1.0) {
    throw std::invalid_argument("sarsa_update: gamma must lie in [0, 1)");
  }
  const HybridCritic at_s = condition(critic, s_params);
  const HybridCritic at_next = condition(critic, next_params);
  const double delta = r + gamma * eval(at_next, a_next) - eval(at_s, a);

  std::vector<double> coeffs = critic.coeffs();
  for (int i = 0; i < critic.size(); ++i) {
    coeffs[i] += alpha * delta * atom_eval(at_s.atoms()[i], a);
  }
  return critic.with_coeffs(std::move(coeffs));
}

}  // namespace fpg
