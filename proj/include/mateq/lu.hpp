#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mateq/errors.hpp"
#include "mateq/matrix.hpp"

namespace mateq {

/// LU factorization with partial pivoting. Pivots below
/// 1e-13 * max|entry| are treated as singular.
class LuFactorization {
 public:
  explicit LuFactorization(Matrix a) : lu_(std::move(a)) {
    if (!lu_.square()) {
      throw ShapeError("lu: matrix must be square, got " + lu_.shape_str());
    }
    const std::size_t n = lu_.rows();
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    const double pivot_tol = 1e-13 * max_abs(lu_);

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        const double v = std::abs(lu_(i, k));
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (!(best > pivot_tol)) {
        throw SingularMatrixError(
            "singular matrix: pivot " + std::to_string(k) + " magnitude " +
                std::to_string(best) + " below tolerance",
            k);
      }
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        const double m = lu_(i, k) / lu_(k, k);
        lu_(i, k) = m;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
      }
    }
  }

  /// Solve A X = rhs for a matrix right-hand side.
  Matrix solve(const Matrix& rhs) const {
    const std::size_t n = lu_.rows();
    if (rhs.rows() != n) {
      throw ShapeError("lu_solve: rhs rows " + rhs.shape_str() +
                       " incompatible with " + lu_.shape_str());
    }
    Matrix x(n, rhs.cols());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < rhs.cols(); ++j) x(i, j) = rhs(perm_[i], j);
    }
    // forward substitution (unit lower)
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = k + 1; i < n; ++i) {
        const double m = lu_(i, k);
        if (m == 0.0) continue;
        for (std::size_t j = 0; j < rhs.cols(); ++j) x(i, j) -= m * x(k, j);
      }
    }
    // back substitution
    for (std::size_t k = n; k-- > 0;) {
      const double d = lu_(k, k);
      for (std::size_t j = 0; j < rhs.cols(); ++j) x(k, j) /= d;
      for (std::size_t i = 0; i < k; ++i) {
        const double m = lu_(i, k);
        if (m == 0.0) continue;
        for (std::size_t j = 0; j < rhs.cols(); ++j) x(i, j) -= m * x(k, j);
      }
    }
    return x;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

inline Matrix lu_solve(const Matrix& a, const Matrix& rhs) {
  return LuFactorization(a).solve(rhs);
}

inline Matrix inverse(const Matrix& a) {
  return lu_solve(a, Matrix::identity(a.rows()));
}

/// Cholesky factor (lower triangular) of a symmetric matrix, or nullopt if
/// a diagonal entry falls below -tol during elimination. tol > 0 accepts
/// positive semi-definite inputs to tolerance.
inline std::optional<Matrix> cholesky(const Matrix& a, double tol = 0.0) {
  if (!a.square()) {
    throw ShapeError("cholesky: matrix must be square, got " + a.shape_str());
  }
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < n; ++k) d -= l(j, k) * l(j, k);
    if (d < -tol) return std::nullopt;
    if (d <= tol) {
      // semi-definite direction: the rest of the column must vanish too,
      // otherwise the matrix is indefinite
      const double col_tol =
          std::sqrt((std::abs(d) + tol) * (max_abs(a) + tol)) + tol;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = a(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
        if (std::abs(s) > col_tol) return std::nullopt;
      }
      l(j, j) = 0.0;
      continue;
    }
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

inline bool is_positive_definite(const Matrix& a) {
  if (!a.square()) return false;
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < n; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0) return false;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

/// PSD check with tolerance: all Cholesky diagonal terms >= -tol.
inline bool is_positive_semidefinite(const Matrix& a, double tol = 1e-10) {
  return cholesky(a, tol * std::max(1.0, max_abs(a))).has_value();
}

}  // namespace mateq
