#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace clubcascade {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Symmetric matrix whose mirrored entries are bit-identical. All mutation
// goes through operations that write (i, j) and (j, i) from the same value.
class SymMatrix {
 public:
  explicit SymMatrix(Index dim);

  static SymMatrix zero(Index dim) { return SymMatrix(dim); }
  static SymMatrix identity(Index dim, double scale = 1.0);
  // Symmetrizes as (A + Aᵀ) / 2.
  static SymMatrix from_dense(const Matrix& a);

  Index dim() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& dense() const noexcept { return m_; }
  double trace() const { return m_.trace(); }

  // this += w · x xᵀ
  void add_outer(const Vector& x, double w = 1.0);
  void add_diagonal(double v);
  SymMatrix& operator+=(const SymMatrix& other);

  bool is_symmetric() const;

 private:
  Matrix m_;
};

// Lower-triangular L with L·Lᵀ equal to the factored matrix.
class CholeskyFactor {
 public:
  Index dim() const noexcept { return lower_.rows(); }
  const Matrix& lower() const noexcept { return lower_; }

  Vector solve(const Vector& b) const;
  // Solves L z = x.
  Vector forward(const Vector& x) const;
  double log_determinant() const;

 private:
  friend CholeskyFactor cholesky(const SymMatrix& m);
  explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}
  Matrix lower_;
};

/// Throws Errc::not_positive_definite when a pivot falls to 1e-12·trace/dim or below.
CholeskyFactor cholesky(const SymMatrix& m);

/// Solves (λI + S) θ = b.
Vector ridge_estimate(const SymMatrix& s, const Vector& b, double lambda);

/// xᵀ M⁻¹ x for the matrix factored by `chol`.
double quad_form_inv(const CholeskyFactor& chol, const Vector& x);

/// Column-wise xᵀ M⁻¹ x for every column of `xs` (d × n).
Vector quad_form_inv_columns(const CholeskyFactor& chol, const Matrix& xs);

// Shifted inverse power iteration. The shift sits strictly below the
// Gershgorin lower bound so the shifted matrix stays positive definite.
inline constexpr int kMinEigenMaxIterations = 10000;
double min_eigenvalue(const SymMatrix& m, double tol = 1e-12);

struct TruncatedSvd {
  Matrix left;      // n × d
  Vector singulars; // d, nonincreasing
  Matrix right;     // m × d
};

/// Top-d singular triplets by block power iteration with Rayleigh–Ritz
/// rotation; converged when the leading subspace moves by less than tol.
inline constexpr int kSvdMaxIterations = 10000;
TruncatedSvd truncated_svd(const Matrix& a, Index d, double tol = 1e-10);

}  // namespace clubcascade
