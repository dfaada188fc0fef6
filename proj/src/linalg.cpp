#include "clubcascade/linalg.hpp"

#include "clubcascade/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace clubcascade {

namespace {

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    throw Error(Errc::dimension_mismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

// Deterministic orthonormal starting block for the subspace iteration.
Matrix start_block(Index rows, Index cols) {
  std::mt19937_64 gen(0x5eedULL);
  Matrix z(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      z(i, j) = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    }
  }
  Eigen::HouseholderQR<Matrix> qr(z);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

// Replaces the columns of `q` not flagged in `keep` by unit vectors orthogonal
// to everything before them.
void complete_orthonormal(Matrix& q, const std::vector<bool>& keep) {
  const Index n = q.rows();
  Index next_basis = 0;
  for (Index j = 0; j < q.cols(); ++j) {
    if (keep[static_cast<std::size_t>(j)]) continue;
    for (; next_basis < n; ++next_basis) {
      Vector v = Vector::Unit(n, next_basis);
      for (Index i = 0; i < q.cols(); ++i) {
        if (i == j || (!keep[static_cast<std::size_t>(i)] && i > j)) continue;
        v -= q.col(i).dot(v) * q.col(i);
      }
      // second pass for numerical orthogonality
      for (Index i = 0; i < q.cols(); ++i) {
        if (i == j || (!keep[static_cast<std::size_t>(i)] && i > j)) continue;
        v -= q.col(i).dot(v) * q.col(i);
      }
      const double norm = v.norm();
      if (norm > 1e-6) {
        q.col(j) = v / norm;
        ++next_basis;
        break;
      }
    }
  }
}

}  // namespace

SymMatrix::SymMatrix(Index dim) : m_(Matrix::Zero(dim, dim)) {
  if (dim < 1) throw Error(Errc::dimension_mismatch, "SymMatrix dimension must be >= 1");
}

SymMatrix SymMatrix::identity(Index dim, double scale) {
  SymMatrix s(dim);
  s.m_.diagonal().setConstant(scale);
  return s;
}

SymMatrix SymMatrix::from_dense(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(Errc::dimension_mismatch, "SymMatrix::from_dense needs a square matrix");
  }
  SymMatrix s(a.rows());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = j; i < a.rows(); ++i) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      s.m_(i, j) = v;
      s.m_(j, i) = v;
    }
  }
  return s;
}

void SymMatrix::add_outer(const Vector& x, double w) {
  require_same_dim(dim(), x.size(), "SymMatrix::add_outer");
  const Index n = dim();
  for (Index j = 0; j < n; ++j) {
    const double wxj = w * x[j];
    for (Index i = j; i < n; ++i) {
      m_(i, j) += wxj * x[i];
    }
  }
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) m_(j, i) = m_(i, j);
  }
}

void SymMatrix::add_diagonal(double v) { m_.diagonal().array() += v; }

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  require_same_dim(dim(), other.dim(), "SymMatrix::operator+=");
  m_ += other.m_;
  return *this;
}

bool SymMatrix::is_symmetric() const {
  for (Index j = 0; j < dim(); ++j) {
    for (Index i = j + 1; i < dim(); ++i) {
      if (m_(i, j) != m_(j, i)) return false;
    }
  }
  return true;
}

CholeskyFactor cholesky(const SymMatrix& m) {
  const Index n = m.dim();
  const double trace = m.trace();
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    throw Error(Errc::not_positive_definite, "nonpositive trace");
  }
  const double floor = 1e-12 * trace / static_cast<double>(n);
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > floor)) {
      throw Error(Errc::not_positive_definite,
                  "pivot " + std::to_string(j) + " = " + std::to_string(pivot));
    }
    const double diag = std::sqrt(pivot);
    l(j, j) = diag;
    for (Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / diag;
    }
  }
  return CholeskyFactor(std::move(l));
}

Vector CholeskyFactor::forward(const Vector& x) const {
  require_same_dim(dim(), x.size(), "CholeskyFactor::forward");
  return lower_.triangularView<Eigen::Lower>().solve(x);
}

Vector CholeskyFactor::solve(const Vector& b) const {
  Vector y = forward(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

double CholeskyFactor::log_determinant() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

Vector ridge_estimate(const SymMatrix& s, const Vector& b, double lambda) {
  require_same_dim(s.dim(), b.size(), "ridge_estimate");
  if (!(lambda > 0.0)) throw Error(Errc::invalid_config, "ridge lambda must be positive");
  SymMatrix m = s;
  m.add_diagonal(lambda);
  return cholesky(m).solve(b);
}

double quad_form_inv(const CholeskyFactor& chol, const Vector& x) {
  return chol.forward(x).squaredNorm();
}

Vector quad_form_inv_columns(const CholeskyFactor& chol, const Matrix& xs) {
  require_same_dim(chol.dim(), xs.rows(), "quad_form_inv_columns");
  Matrix z = chol.lower().triangularView<Eigen::Lower>().solve(xs);
  return z.colwise().squaredNorm().transpose();
}

double min_eigenvalue(const SymMatrix& m, double tol) {
  const Index n = m.dim();
  if (n == 1) return m(0, 0);

  const Matrix& a = m.dense();
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;

  double gershgorin = a(0, 0) - (a.row(0).cwiseAbs().sum() - std::abs(a(0, 0)));
  for (Index i = 1; i < n; ++i) {
    gershgorin = std::min(gershgorin,
                          a(i, i) - (a.row(i).cwiseAbs().sum() - std::abs(a(i, i))));
  }
  const double shift = gershgorin - 1e-3 * scale;
  SymMatrix shifted = m;
  shifted.add_diagonal(-shift);
  const CholeskyFactor chol = cholesky(shifted);

  std::mt19937_64 gen(0x3141ULL);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.25 * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
  v.normalize();

  for (int iter = 0; iter < kMinEigenMaxIterations; ++iter) {
    v = chol.solve(v);
    v.normalize();
    const Vector av = a * v;
    const double rho = v.dot(av);
    if ((av - rho * v).norm() <= tol * scale) return rho;
  }
  throw Error(Errc::no_convergence, "min_eigenvalue exceeded iteration cap");
}

TruncatedSvd truncated_svd(const Matrix& a, Index d, double tol) {
  const Index n = a.rows();
  const Index m = a.cols();
  if (d < 1 || d > std::min(n, m)) {
    throw Error(Errc::dimension_mismatch, "truncated_svd rank must be in [1, min(rows, cols)]");
  }

  // Iterate on the Gram matrix of the smaller side.
  const bool row_side = n <= m;
  const Matrix gram = row_side ? Matrix(a * a.transpose()) : Matrix(a.transpose() * a);
  const Index k = gram.rows();

  Matrix q = start_block(k, d);
  Vector w = Vector::Zero(d);
  bool converged = false;
  for (int iter = 0; iter < kSvdMaxIterations && !converged; ++iter) {
    Eigen::HouseholderQR<Matrix> qr(gram * q);
    Matrix qn = qr.householderQ() * Matrix::Identity(k, d);

    // Rayleigh–Ritz rotation orders the block by decreasing eigenvalue.
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(qn.transpose() * gram * qn);
    const Matrix rot = ritz.eigenvectors().rowwise().reverse();
    qn = qn * rot;
    w = ritz.eigenvalues().reverse();

    const double top = std::max(w[0], 0.0);
    const double noise = 1e-15 * static_cast<double>(k) * top;
    double change = 0.0;
    for (Index j = 0; j < d; ++j) {
      if (w[j] <= noise) continue;
      change = std::max(change, (qn.col(j) - q * (q.transpose() * qn.col(j))).norm());
    }
    q = std::move(qn);
    converged = change < tol || top == 0.0;
  }
  if (!converged) throw Error(Errc::no_convergence, "truncated_svd exceeded iteration cap");

  const double top = std::max(w[0], 0.0);
  const double noise = 1e-15 * static_cast<double>(k) * top;
  TruncatedSvd out;
  out.singulars = Vector::Zero(d);
  std::vector<bool> keep(static_cast<std::size_t>(d), true);
  for (Index j = 0; j < d; ++j) {
    if (w[j] > noise && top > 0.0) {
      out.singulars[j] = std::sqrt(w[j]);
    } else {
      keep[static_cast<std::size_t>(j)] = false;
    }
  }

  Matrix other = row_side ? Matrix(a.transpose() * q) : Matrix(a * q);
  for (Index j = 0; j < d; ++j) {
    if (keep[static_cast<std::size_t>(j)]) other.col(j) /= out.singulars[j];
  }
  complete_orthonormal(other, keep);

  if (row_side) {
    out.left = std::move(q);
    out.right = std::move(other);
  } else {
    out.right = std::move(q);
    out.left = std::move(other);
  }
  return out;
}

}  // namespace clubcascade
