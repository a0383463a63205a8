#include "fpg/oracle.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "fpg/estimators.hpp"

namespace fpg {

QuadratureSpec::QuadratureSpec(int nodes_per_dim_in, int dimension_in)
    : nodes_per_dim(nodes_per_dim_in), dimension(dimension_in) {
  if (nodes_per_dim < 4 || nodes_per_dim > 64) {
    throw std::invalid_argument("QuadratureSpec: nodes_per_dim must lie in [4, 64]");
  }
  if (dimension < 1 || dimension > 8) {
    throw std::invalid_argument("QuadratureSpec: dimension must lie in [1, 8]");
  }
}

GridSpec::GridSpec(double half_width_in, int points_in)
    : half_width(half_width_in), points(points_in) {
  if (!(half_width > 0.0)) {
    throw std::invalid_argument("GridSpec: half_width must be positive");
  }
  if (points < 64 || points > 8192 || (points & (points - 1)) != 0) {
    throw std::invalid_argument("GridSpec: points must be a power of two in [64, 8192]");
  }
}

double quad_expectation(const HybridCritic& critic, const GaussianPolicy& policy,
                        const QuadratureSpec& spec) {
  if (spec.dimension != policy.dim() || critic.dim() != policy.dim()) {
    throw DimensionError("quad_expectation: dimension mismatch");
  }
  const int n = spec.dimension;
  const int k = spec.nodes_per_dim;
  const GaussHermiteRule rule = gauss_hermite_nodes(k);
  const double root2 = std::sqrt(2.0);

  std::vector<int> idx(n, 0);
  double total = 0.0;
  Vector z(n);
  while (true) {
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      w *= rule.weights[idx[d]];
      z[d] = rule.nodes[idx[d]];
    }
    const Vector a = policy.mean + root2 * (policy.scale.lower().transpose() * z);
    total += w * eval(critic, a);
    int d = 0;
    while (d < n && ++idx[d] == k) idx[d++] = 0;
    if (d == n) break;
  }
  return total * std::pow(M_PI, -0.5 * n);
}

namespace {

template <typename Policy>
std::pair<double, double> mc_impl(const HybridCritic& critic, const Policy& policy,
                                  long long n, RngStream& rng) {
  if (n < 100) {
    throw std::invalid_argument("mc_expectation: need at least 100 samples");
  }
  double mean = 0.0;
  double m2 = 0.0;
  for (long long i = 1; i <= n; ++i) {
    const double q = eval(critic, sample(policy, rng));
    const double delta = q - mean;
    mean += delta / static_cast<double>(i);
    m2 += delta * (q - mean);
  }
  const double variance = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(variance / static_cast<double>(n))};
}

double checked(double y) {
  if (!std::isfinite(y)) {
    throw std::invalid_argument("finite_diff: non-finite function value");
  }
  return y;
}

}  // namespace

std::pair<double, double> mc_expectation(const HybridCritic& critic,
                                         const GaussianPolicy& policy, long long n,
                                         RngStream& rng) {
  return mc_impl(critic, policy, n, rng);
}

std::pair<double, double> mc_expectation(const HybridCritic& critic,
                                         const MixturePolicy& policy, long long n,
                                         RngStream& rng) {
  return mc_impl(critic, policy, n, rng);
}

double finite_diff_scalar(const std::function<double(double)>& f, double point,
                          double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff: step must be positive");
  return (checked(f(point + step)) - checked(f(point - step))) / (2.0 * step);
}

Vector finite_diff(const std::function<double(const Vector&)>& f, const Vector& point,
                   double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff: step must be positive");
  Vector grad(point.size());
  for (int i = 0; i < point.size(); ++i) {
    Vector hi = point, lo = point;
    hi[i] += step;
    lo[i] -= step;
    grad[i] = (checked(f(hi)) - checked(f(lo))) / (2.0 * step);
  }
  return grad;
}

Matrix finite_diff_matrix(const std::function<double(const Matrix&)>& f,
                          const Matrix& point, double step, bool symmetrize) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff: step must be positive");
  Matrix grad(point.rows(), point.cols());
  for (int j = 0; j < point.rows(); ++j) {
    for (int k = 0; k < point.cols(); ++k) {
      if (symmetrize && k < j) {
        grad(j, k) = grad(k, j);
        continue;
      }
      Matrix hi = point, lo = point;
      if (symmetrize && j != k) {
        hi(j, k) += 0.5 * step;
        hi(k, j) += 0.5 * step;
        lo(j, k) -= 0.5 * step;
        lo(k, j) -= 0.5 * step;
      } else {
        hi(j, k) += step;
        lo(j, k) -= step;
      }
      grad(j, k) = (checked(f(hi)) - checked(f(lo))) / (2.0 * step);
    }
  }
  return grad;
}

Matrix finite_diff_second(const std::function<double(const Vector&)>& f,
                          const Vector& point, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff: step must be positive");
  const int n = static_cast<int>(point.size());
  Matrix hess(n, n);
  const double center = checked(f(point));
  for (int i = 0; i < n; ++i) {
    Vector hi = point, lo = point;
    hi[i] += step;
    lo[i] -= step;
    hess(i, i) = (checked(f(hi)) - 2.0 * center + checked(f(lo))) / (step * step);
    for (int j = i + 1; j < n; ++j) {
      Vector pp = point, pm = point, mp = point, mm = point;
      pp[i] += step;
      pp[j] += step;
      pm[i] += step;
      pm[j] -= step;
      mp[i] -= step;
      mp[j] += step;
      mm[i] -= step;
      mm[j] -= step;
      hess(i, j) = (checked(f(pp)) - checked(f(pm)) - checked(f(mp)) + checked(f(mm))) /
                   (4.0 * step * step);
      hess(j, i) = hess(i, j);
    }
  }
  return hess;
}

namespace {

using Complexd = std::complex<double>;

// Naive length-N transform; sign = -1 forward, +1 inverse (inverse scales 1/N).
std::vector<Complexd> dft_1d(const std::vector<Complexd>& in, int sign) {
  const int n = static_cast<int>(in.size());
  std::vector<Complexd> out(n);
  for (int k = 0; k < n; ++k) {
    Complexd acc{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
      const double angle = sign * 2.0 * M_PI * static_cast<double>(j) *
                           static_cast<double>(k) / static_cast<double>(n);
      acc += in[j] * Complexd(std::cos(angle), std::sin(angle));
    }
    out[k] = sign > 0 ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

// Signed angular frequency for bin k on an N-point grid of spacing dx; the
// Nyquist bin is reported as zero (its derivative weight is ambiguous).
double bin_frequency(int k, int n, double dx) {
  if (2 * k == n) return 0.0;
  const int s = (2 * k < n) ? k : k - n;
  return 2.0 * M_PI * static_cast<double>(s) / (static_cast<double>(n) * dx);
}

std::vector<double> sample_window(const GridSpec& grid,
                                  const std::function<double(double)>& f) {
  const int n = grid.points;
  const double dx = 2.0 * grid.half_width / n;
  std::vector<double> values(n);
  for (int j = 0; j < n; ++j) {
    const double x = -grid.half_width + j * dx;
    values[j] = f(x);
    if (!std::isfinite(values[j])) {
      throw std::invalid_argument("dft check: non-finite sample");
    }
  }
  if (std::abs(values.front()) > 1e-8 || std::abs(values.back()) > 1e-8) {
    throw WindowingError("dft check: function does not decay inside the grid");
  }
  return values;
}

}  // namespace

double dft_lemma_check_vector(const GridSpec& grid,
                              const std::function<double(double)>& f) {
  const int n = grid.points;
  const double dx = 2.0 * grid.half_width / n;
  const std::vector<double> values = sample_window(grid, f);

  std::vector<Complexd> spectrum(n);
  for (int j = 0; j < n; ++j) spectrum[j] = Complexd(values[j], 0.0);
  spectrum = dft_1d(spectrum, -1);
  for (int k = 0; k < n; ++k) {
    spectrum[k] *= Complexd(0.0, bin_frequency(k, n, dx));
  }
  const std::vector<Complexd> derivative = dft_1d(spectrum, +1);

  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const double x = -grid.half_width + j * dx;
    if (std::abs(x) > 0.5 * grid.half_width) continue;
    const double reference = (f(x + 1e-6) - f(x - 1e-6)) / 2e-6;
    worst = std::max(worst, std::abs(derivative[j].real() - reference));
  }
  return worst;
}

double dft_lemma_check_matrix(const GridSpec& grid,
                              const std::function<double(double)>& f) {
  const int n = grid.points;
  const double dx = 2.0 * grid.half_width / n;
  const std::vector<double> values = sample_window(grid, f);

  std::vector<Complexd> spectrum(n);
  for (int j = 0; j < n; ++j) spectrum[j] = Complexd(values[j], 0.0);
  spectrum = dft_1d(spectrum, -1);
  for (int k = 0; k < n; ++k) {
    const double w = bin_frequency(k, n, dx);
    spectrum[k] *= -w * w;  // (i w)^2
  }
  const std::vector<Complexd> second = dft_1d(spectrum, +1);

  double worst = 0.0;
  const double h = 1e-4;
  for (int j = 0; j < n; ++j) {
    const double x = -grid.half_width + j * dx;
    if (std::abs(x) > 0.5 * grid.half_width) continue;
    const double reference = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    worst = std::max(worst, std::abs(second[j].real() - reference));
  }
  return worst;
}

double dft_lemma_check_matrix(const GridSpec& grid,
                              const std::function<double(double, double)>& f) {
  const int n = grid.points;
  const double dx = 2.0 * grid.half_width / n;
  auto coord = [&](int j) { return -grid.half_width + j * dx; };

  std::vector<std::vector<Complexd>> field(n, std::vector<Complexd>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const double y = f(coord(j), coord(k));
      if (!std::isfinite(y)) {
        throw std::invalid_argument("dft check: non-finite sample");
      }
      field[j][k] = Complexd(y, 0.0);
      if ((j == 0 || j == n - 1 || k == 0 || k == n - 1) && std::abs(y) > 1e-8) {
        throw WindowingError("dft check: function does not decay inside the grid");
      }
    }
  }

  auto transform_2d = [&](std::vector<std::vector<Complexd>> m, int sign) {
    for (int j = 0; j < n; ++j) m[j] = dft_1d(m[j], sign);
    std::vector<Complexd> column(n);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) column[j] = m[j][k];
      column = dft_1d(column, sign);
      for (int j = 0; j < n; ++j) m[j][k] = column[j];
    }
    return m;
  };

  const auto spectrum = transform_2d(field, -1);

  const double h = 1e-4;
  auto fd_hessian_entry = [&](int p, int q, double x, double y) {
    if (p == q) {
      const double lo_x = p == 0 ? x - h : x;
      const double hi_x = p == 0 ? x + h : x;
      const double lo_y = p == 0 ? y : y - h;
      const double hi_y = p == 0 ? y : y + h;
      return (f(hi_x, hi_y) - 2.0 * f(x, y) + f(lo_x, lo_y)) / (h * h);
    }
    return (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) /
           (4.0 * h * h);
  };

  double worst = 0.0;
  for (int p = 0; p < 2; ++p) {
    for (int q = p; q < 2; ++q) {
      auto weighted = spectrum;
      for (int j = 0; j < n; ++j) {
        const double wj = bin_frequency(j, n, dx);
        for (int k = 0; k < n; ++k) {
          const double wk = bin_frequency(k, n, dx);
          const double wp = p == 0 ? wj : wk;
          const double wq = q == 0 ? wj : wk;
          weighted[j][k] *= Complexd(0.0, wp) * Complexd(0.0, wq);
        }
      }
      const auto second = transform_2d(weighted, +1);
      for (int j = 0; j < n; ++j) {
        const double x = coord(j);
        if (std::abs(x) > 0.5 * grid.half_width) continue;
        for (int k = 0; k < n; ++k) {
          const double y = coord(k);
          if (std::abs(y) > 0.5 * grid.half_width) continue;
          const double reference = fd_hessian_entry(p, q, x, y);
          worst = std::max(worst, std::abs(second[j][k].real() - reference));
        }
      }
    }
  }
  return worst;
}

GaussianDerivatives default_gaussian_derivatives() {
  GaussianDerivatives d;
  d.value = [](const GaussianPolicy& p, const Vector& a) { return pdf(p, a); };
  d.grad = [](const GaussianPolicy& p, const Vector& a) { return pdf_grad_a(p, a); };
  d.hessian = [](const GaussianPolicy& p, const Vector& a) {
    return pdf_hessian_a(p, a);
  };
  return d;
}

double aux_lemma_check(const GaussianPolicy& policy, int m) {
  return aux_lemma_check_against(policy, m, default_gaussian_derivatives());
}

double aux_lemma_check_against(const GaussianPolicy& policy, int m,
                               const GaussianDerivatives& derivatives) {
  if (m < 0 || m > 2) {
    throw std::invalid_argument("aux_lemma_check: order must be 0, 1, or 2");
  }
  RngStream rng(0x5EEDull);
  auto reflected = [&policy](const Vector& x) { return auxiliary_pdf(policy, x); };

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a = sample(policy, rng);
    const Vector at = policy.mean - a;
    if (m == 0) {
      worst = std::max(worst, std::abs(reflected(at) - derivatives.value(policy, a)));
    } else if (m == 1) {
      const Vector lhs = finite_diff(reflected, at, 1e-5);
      const Vector rhs = -derivatives.grad(policy, a);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    } else {
      const Matrix lhs = finite_diff_second(reflected, at, 1e-4);
      const Matrix rhs = derivatives.hessian(policy, a);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace fpg
