#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace fpg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Triangular factor of a symmetric positive-definite matrix.
///
/// Stores the lower-triangular L with positive diagonal such that
/// sigma = Lᵀ·L.  Every application of sigma⁻¹ goes through triangular
/// solves against L; the full inverse is never formed on solve paths.
class SpdFactor {
 public:
  /// Validates lower-triangularity (exact zeros above the diagonal),
  /// a strictly positive diagonal, and finiteness.
  explicit SpdFactor(Matrix lower);

  static SpdFactor identity(int n);
  static SpdFactor scaled_identity(int n, double s);

  /// Factors an SPD matrix into LᵀL form.  Throws SingularMatrixError when
  /// the matrix is not positive definite, DimensionError when not square
  /// or not symmetric.
  static SpdFactor from_spd(const Matrix& spd);

  int dim() const { return static_cast<int>(lower_.rows()); }
  const Matrix& lower() const { return lower_; }

  Vector solve_factor(const Vector& v) const;    // L x = v
  Vector solve_factor_t(const Vector& v) const;  // Lᵀ x = v

  Vector solve(const Vector& v) const;  // (LᵀL) x = v

  /// sigma⁻¹ assembled by solving against the identity; symmetrized so the
  /// result is exactly symmetric entrywise.
  Matrix inverse() const;

  double det() const;      // det(LᵀL) = prod(diag L)²
  double log_det() const;  // 2·sum(log diag L)

 private:
  Matrix lower_;
};

/// sigma = factor.lower()ᵀ · factor.lower(); symmetric positive definite.
Matrix spd_from_factor(const SpdFactor& factor);

/// Multivariate normal density (2π)^{-n/2} det(cov)^{-1/2} e^{-½‖x-mean‖²_{cov⁻¹}}.
/// Throws SingularMatrixError for non-SPD cov, DimensionError on mismatch.
double gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov);

/// Log-domain evaluation of the same density (independent computation path).
double log_gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov);

/// Density evaluated through a precomputed factor of the covariance.
double gaussian_pdf(const Vector& x, const Vector& mean, const SpdFactor& scale);
double log_gaussian_pdf(const Vector& x, const Vector& mean, const SpdFactor& scale);

/// Standard normal CDF, absolute error below 1e-12.
double std_normal_cdf(double x);

/// Gauss-Hermite rule for the weight e^{-x²}: sum w_i g(x_i) ≈ ∫g(x)e^{-x²}dx,
/// exact for polynomials of degree ≤ 2k-1.  Nodes ascending.
struct GaussHermiteRule {
  Vector nodes;
  Vector weights;
};
GaussHermiteRule gauss_hermite_nodes(int k);  // 1 ≤ k ≤ 64

}  // namespace fpg
