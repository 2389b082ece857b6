#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "skewflow/errors.hpp"

namespace skewflow {

using Vec = std::vector<double>;
using ConstSpan = std::span<const double>;

/// Dense row-major real matrix. Sizes here are tiny (a handful of rows), so
/// storage is a flat vector and all products are naive loops.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
      throw DimensionError("payoff matrix must have at least one row and column");
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) {
        throw DimensionError("ragged payoff matrix: row " + std::to_string(i) + " has " +
                             std::to_string(rows[i].size()) + " entries, expected " +
                             std::to_string(m.cols_));
      }
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
    }
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> r;
    for (const auto& row : rows) r.emplace_back(row);
    return from_rows(r);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// AᵀA (cols × cols).
  Matrix gram() const {
    Matrix g(cols_, cols_);
    for (std::size_t a = 0; a < cols_; ++a)
      for (std::size_t b = 0; b < cols_; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, a) * (*this)(i, b);
        g(a, b) = s;
      }
    return g;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_size(ConstSpan v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(n) +
                         ", got " + std::to_string(v.size()));
  }
}

inline double dot(ConstSpan a, ConstSpan b) {
  require_size(b, a.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// A v
inline Vec multiply(const Matrix& a, ConstSpan v) {
  require_size(v, a.cols(), "matrix-vector product");
  Vec out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

/// Aᵀ v
inline Vec multiply_transposed(const Matrix& a, ConstSpan v) {
  require_size(v, a.rows(), "transposed matrix-vector product");
  Vec out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j) * v[i];
  return out;
}

/// pᵀ A q
inline double bilinear(ConstSpan p, const Matrix& a, ConstSpan q) {
  return dot(p, multiply(a, q));
}

inline double norm_inf(ConstSpan v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double norm2(ConstSpan v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double norm1(ConstSpan v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline Vec axpy(ConstSpan x, double a, ConstSpan y) {
  require_size(y, x.size(), "axpy");
  Vec out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * y[i];
  return out;
}

namespace detail {

// Power iteration for the top eigenvalue of a symmetric PSD matrix from one
// start vector. Returns the Rayleigh quotient once it stops moving.
inline double power_iteration(const Matrix& s, Vec v, double tol, std::size_t max_iters) {
  double n = norm2(v);
  for (double& c : v) c /= n;
  double lambda = dot(v, multiply(s, v));
  for (std::size_t it = 0; it < max_iters; ++it) {
    Vec w = multiply(s, v);
    double wn = norm2(w);
    if (wn == 0.0) return 0.0;  // start vector in the null space
    for (double& c : w) c /= wn;
    double next = dot(w, multiply(s, w));
    v = std::move(w);
    if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) return next;
    lambda = next;
  }
  throw ConvergenceError("power iteration did not converge after " +
                             std::to_string(max_iters) + " iterations",
                         lambda);
}

// Largest eigenvalue of a symmetric PSD matrix. The normalized all-ones start
// can be orthogonal to the top eigenvector (matching pennies is exactly that
// case), so the basis vectors are tried too and the largest quotient wins.
inline double largest_eigenvalue(const Matrix& s, double tol, std::size_t max_iters) {
  const std::size_t n = s.rows();
  double best = power_iteration(s, Vec(n, 1.0), tol, max_iters);
  for (std::size_t i = 0; i < n; ++i) {
    Vec e(n, 0.0);
    e[i] = 1.0;
    best = std::max(best, power_iteration(s, std::move(e), tol, max_iters));
  }
  return best;
}

}  // namespace detail

struct SingularValueBounds {
  double alpha_max = 0.0;
  double alpha_min = 0.0;
};

/// Largest and smallest singular values of `a` by power iteration on AᵀA.
/// The smallest is found from the shifted operator λ_max·I − AᵀA and is only
/// computed for square matrices; it is reported as 0 otherwise or when the
/// matrix is numerically rank deficient.
inline SingularValueBounds singular_value_bounds(const Matrix& a, double tol = 1e-12,
                                                 std::size_t max_iters = 10000) {
  const Matrix g = a.gram();
  const double lmax = detail::largest_eigenvalue(g, tol, max_iters);
  SingularValueBounds out;
  out.alpha_max = std::sqrt(std::max(0.0, lmax));
  if (a.rows() != a.cols() || lmax == 0.0) return out;

  Matrix shifted(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) shifted(i, j) = (i == j ? lmax : 0.0) - g(i, j);
  const double mu = detail::largest_eigenvalue(shifted, tol, max_iters);
  const double lmin = lmax - mu;
  out.alpha_min = lmin <= 1e-12 * lmax ? 0.0 : std::sqrt(lmin);
  return out;
}

}  // namespace skewflow
