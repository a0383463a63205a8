#include "fpg/linalg.hpp"

#include <cmath>
#include <numbers>

namespace fpg {

namespace {

void check_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionError(std::string(what) + ": matrix must be square, n >= 1");
  }
}

}  // namespace

SpdFactor::SpdFactor(Matrix lower) : lower_(std::move(lower)) {
  check_square(lower_, "SpdFactor");
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(lower_(i, j))) {
        throw std::invalid_argument("SpdFactor: non-finite entry");
      }
      if (j > i && lower_(i, j) != 0.0) {
        throw std::invalid_argument("SpdFactor: entries above the diagonal must be zero");
      }
    }
    if (!(lower_(i, i) > 0.0)) {
      throw std::invalid_argument("SpdFactor: diagonal entries must be positive");
    }
  }
}

SpdFactor SpdFactor::identity(int n) { return SpdFactor(Matrix::Identity(n, n)); }

SpdFactor SpdFactor::scaled_identity(int n, double s) {
  return SpdFactor(Matrix(s * Matrix::Identity(n, n)));
}

SpdFactor SpdFactor::from_spd(const Matrix& spd) {
  check_square(spd, "SpdFactor::from_spd");
  const int n = static_cast<int>(spd.rows());
  const double scale = spd.cwiseAbs().maxCoeff();
  if ((spd - spd.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0)) {
    throw DimensionError("SpdFactor::from_spd: matrix not symmetric");
  }
  // LᵀL factor via Cholesky of the index-reversed matrix: with J the
  // antidiagonal permutation, J·spd·J = G·Gᵀ gives spd = U·Uᵀ for the
  // upper-triangular U = J·G·J, hence L = Uᵀ satisfies LᵀL = spd.
  Matrix rev(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      rev(i, j) = spd(n - 1 - i, n - 1 - j);
    }
  }
  Eigen::LLT<Matrix> llt(rev);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("SpdFactor::from_spd: matrix not positive definite");
  }
  const Matrix g = llt.matrixL();
  Matrix lower = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      lower(i, j) = g(n - 1 - j, n - 1 - i);
    }
  }
  return SpdFactor(std::move(lower));
}

Vector SpdFactor::solve_factor(const Vector& v) const {
  return lower_.triangularView<Eigen::Lower>().solve(v);
}

Vector SpdFactor::solve_factor_t(const Vector& v) const {
  return lower_.transpose().triangularView<Eigen::Upper>().solve(v);
}

Vector SpdFactor::solve(const Vector& v) const {
  // (LᵀL)⁻¹ = L⁻¹ L⁻ᵀ
  return solve_factor(solve_factor_t(v));
}

Matrix SpdFactor::inverse() const {
  const Matrix rhs =
      lower_.transpose().triangularView<Eigen::Upper>().solve(
          Matrix(Matrix::Identity(dim(), dim())));
  const Matrix inv = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return 0.5 * (inv + inv.transpose());
}

double SpdFactor::det() const {
  const double d = lower_.diagonal().prod();
  return d * d;
}

double SpdFactor::log_det() const { return 2.0 * lower_.diagonal().array().log().sum(); }

Matrix spd_from_factor(const SpdFactor& factor) {
  const Matrix& l = factor.lower();
  return l.transpose() * l;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_dims(const Vector& x, const Vector& mean, int cov_dim) {
  if (x.size() != mean.size() || x.size() != cov_dim) {
    throw DimensionError("gaussian_pdf: dimension mismatch");
  }
}

}  // namespace

double gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  check_square(cov, "gaussian_pdf");
  check_dims(x, mean, static_cast<int>(cov.rows()));
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("gaussian_pdf: covariance not positive definite");
  }
  const int n = static_cast<int>(x.size());
  const Matrix l = llt.matrixL();
  const Vector w = l.triangularView<Eigen::Lower>().solve(x - mean);
  const double quad = w.squaredNorm();
  const double sqrt_det = l.diagonal().prod();
  return std::exp(-0.5 * quad) / (std::pow(2.0 * std::numbers::pi, 0.5 * n) * sqrt_det);
}

double log_gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  check_square(cov, "log_gaussian_pdf");
  check_dims(x, mean, static_cast<int>(cov.rows()));
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("log_gaussian_pdf: covariance not positive definite");
  }
  const int n = static_cast<int>(x.size());
  const Matrix l = llt.matrixL();
  const Vector w = l.triangularView<Eigen::Lower>().solve(x - mean);
  const double log_sqrt_det = l.diagonal().array().log().sum();
  return -0.5 * w.squaredNorm() - log_sqrt_det - 0.5 * n * kLog2Pi;
}

double gaussian_pdf(const Vector& x, const Vector& mean, const SpdFactor& scale) {
  check_dims(x, mean, scale.dim());
  const int n = scale.dim();
  // sigma = LᵀL, so ‖x-mean‖²_{sigma⁻¹} = ‖L⁻ᵀ(x-mean)‖².
  const Vector w = scale.solve_factor_t(x - mean);
  const double sqrt_det = scale.lower().diagonal().prod();
  return std::exp(-0.5 * w.squaredNorm()) /
         (std::pow(2.0 * std::numbers::pi, 0.5 * n) * sqrt_det);
}

double log_gaussian_pdf(const Vector& x, const Vector& mean, const SpdFactor& scale) {
  check_dims(x, mean, scale.dim());
  const Vector w = scale.solve_factor_t(x - mean);
  return -0.5 * w.squaredNorm() - 0.5 * scale.log_det() -
         0.5 * scale.dim() * kLog2Pi;
}

double std_normal_cdf(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("std_normal_cdf: non-finite argument");
  }
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

GaussHermiteRule gauss_hermite_nodes(int k) {
  if (k < 1 || k > 64) {
    throw std::invalid_argument("gauss_hermite_nodes: k must be in [1, 64]");
  }
  // Golub-Welsch on the Hermite Jacobi matrix: off-diagonal entries √(i/2),
  // nodes are eigenvalues, weights √π times squared first eigenvector entries.
  Matrix jacobi = Matrix::Zero(k, k);
  for (int i = 1; i < k; ++i) {
    const double b = std::sqrt(0.5 * i);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  GaussHermiteRule rule;
  rule.nodes = eig.eigenvalues();
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  rule.weights = sqrt_pi * eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace fpg
