#pragma once

// Independent reference implementations used to check the library. None of
// these touch Eigen's decompositions; they work on plain loops.

#include "clubcascade/environment.hpp"
#include "clubcascade/linalg.hpp"
#include "clubcascade/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using clubcascade::ItemFeature;
using clubcascade::ItemList;
using clubcascade::Matrix;
using clubcascade::Vector;
using clubcascade::rng::Engine;

inline Matrix random_matrix(Engine& gen, int rows, int cols) {
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = clubcascade::rng::normal(gen);
  return a;
}

inline Vector random_vector(Engine& gen, int dim) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = clubcascade::rng::normal(gen);
  return v;
}

// Uniform direction scaled by a uniform radius in [0, 1].
inline Vector random_in_ball(Engine& gen, int dim) {
  Vector v = random_vector(gen, dim);
  return v / v.norm() * clubcascade::rng::uniform01(gen);
}

inline Vector random_unit(Engine& gen, int dim) {
  Vector v = random_vector(gen, dim);
  return v / v.norm();
}

inline ItemList random_items(Engine& gen, std::size_t count, int dim) {
  ItemList items;
  for (std::size_t i = 0; i < count; ++i) items.push_back({i, random_in_ball(gen, dim)});
  return items;
}

// Laplace expansion along the first row.
inline double cofactor_det(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  double det = 0.0;
  for (int col = 0; col < n; ++col) {
    Matrix minor(n - 1, n - 1);
    for (int i = 1; i < n; ++i) {
      int mj = 0;
      for (int j = 0; j < n; ++j) {
        if (j == col) continue;
        minor(i - 1, mj++) = a(i, j);
      }
    }
    const double sign = (col % 2 == 0) ? 1.0 : -1.0;
    det += sign * a(0, col) * cofactor_det(minor);
  }
  return det;
}

inline Matrix adjugate_inverse_3x3(const Matrix& a) {
  Matrix adj(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj(i, j) = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
    }
  }
  return adj / cofactor_det(a);
}

// Gaussian elimination with partial pivoting.
inline Vector gauss_solve(Matrix a, Vector b) {
  const int n = static_cast<int>(a.rows());
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
    if (pivot != k) {
      a.row(k).swap(a.row(pivot));
      std::swap(b(k), b(pivot));
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b(i) -= f * b(k);
    }
  }
  Vector x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b(i);
    for (int j = i + 1; j < n; ++j) s -= a(i, j) * x(j);
    x(i) = s / a(i, i);
  }
  return x;
}

// Cyclic Jacobi rotations; eigenvalues of a symmetric matrix, descending.
inline std::vector<double> jacobi_eigenvalues(Matrix a) {
  const int n = static_cast<int>(a.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

// Every k-subset of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

// 1 − Π(1 − p), multiplied in the given order.
inline double cascade_reward(const std::vector<double>& probs) {
  double none = 1.0;
  for (double p : probs) none *= 1.0 - p;
  return 1.0 - none;
}

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Best reward over every k-subset of the pool.
inline double brute_force_best_reward(const ItemList& pool, const Vector& theta, std::size_t k) {
  double best = 0.0;
  for (const auto& s : subsets(pool.size(), k)) {
    std::vector<double> probs;
    for (std::size_t i : s) probs.push_back(clamp01(theta.dot(pool[i].x)));
    best = std::max(best, cascade_reward(probs));
  }
  return best;
}

// Reference top-k: stable sort by descending score, then by ascending id.
inline std::vector<std::size_t> sort_top_k(const ItemList& items, const std::vector<double>& scores,
                                           std::size_t k) {
  std::vector<std::size_t> idx(items.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return items[a].id < items[b].id;
  });
  idx.resize(k);
  return idx;
}

// Central-difference Jacobian of f: R^n -> R^n.
inline Matrix central_difference(const std::function<Vector(const Vector&)>& f, const Vector& x,
                                 double h) {
  const int n = static_cast<int>(x.size());
  Matrix j(n, n);
  for (int c = 0; c < n; ++c) {
    Vector xp = x, xm = x;
    xp(c) += h;
    xm(c) -= h;
    j.col(c) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

}  // namespace oracle
