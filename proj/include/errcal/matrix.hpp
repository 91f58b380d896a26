#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errcal/error.hpp"

namespace errcal {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Sized for the small symmetric systems
// that appear in calibrated-regression work (dimension rarely above ~15), so
// the implementation favours clarity over blocking tricks.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) fail(ErrorKind::LayoutError, "ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail(ErrorKind::LayoutError, "matrix product shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

inline Vector operator*(const Matrix& a, const Vector& v) {
  if (a.cols() != v.size()) fail(ErrorKind::LayoutError, "matrix-vector shape mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::LayoutError, "matrix sum shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) += b(i, j);
  return c;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::LayoutError, "matrix difference shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) -= b(i, j);
  return c;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) *= s;
  return c;
}

inline double max_abs(const Matrix& m) {
  double v = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) v = std::max(v, std::abs(m(i, j)));
  return v;
}

inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-9) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > rel_tol * scale) return false;
  return true;
}

// Half-vectorization: stacks the columns of the lower triangle (including the
// diagonal) column by column, giving a vector of length d(d+1)/2.
inline Vector vech(const Matrix& m) {
  if (!is_symmetric(m)) fail(ErrorKind::NotSymmetric, "vech requires a symmetric matrix");
  const std::size_t d = m.rows();
  Vector v;
  v.reserve(d * (d + 1) / 2);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = j; i < d; ++i) v.push_back(m(i, j));
  return v;
}

inline Matrix unvech(std::span<const double> v, std::size_t dim) {
  if (v.size() != dim * (dim + 1) / 2)
    fail(ErrorKind::LayoutError, "half-vectorization length does not match dimension");
  Matrix m(dim, dim);
  std::size_t k = 0;
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t i = j; i < dim; ++i) {
      m(i, j) = v[k];
      m(j, i) = v[k];
      ++k;
    }
  return m;
}

namespace detail {

struct CholeskyFactor {
  Matrix l;                       // lower-triangular factor of P·m·Pᵀ
  std::vector<std::size_t> perm;  // perm[i] = source index of pivot row i
  double condition = 0.0;         // (max diag / min diag)² of the factor
};

// Cholesky factorization. The unpivoted pass runs first so that well-posed
// inputs keep exact scale equivariance; symmetric (diagonal) pivoting is the
// fallback for inputs whose leading minors misbehave.
inline bool try_cholesky(const Matrix& m, bool pivot, CholeskyFactor& out) {
  const std::size_t d = m.rows();
  Matrix a = m;
  out.perm.resize(d);
  std::iota(out.perm.begin(), out.perm.end(), std::size_t{0});
  for (std::size_t j = 0; j < d; ++j) {
    if (pivot) {
      std::size_t r = j;
      for (std::size_t i = j + 1; i < d; ++i)
        if (a(i, i) > a(r, r)) r = i;
      if (r != j) {
        for (std::size_t k = 0; k < d; ++k) std::swap(a(j, k), a(r, k));
        for (std::size_t k = 0; k < d; ++k) std::swap(a(k, j), a(k, r));
        std::swap(out.perm[j], out.perm[r]);
      }
    }
    const double pivot_value = a(j, j);
    if (!(pivot_value > 0.0)) return false;
    const double root = std::sqrt(pivot_value);
    a(j, j) = root;
    for (std::size_t i = j + 1; i < d; ++i) a(i, j) /= root;
    for (std::size_t i = j + 1; i < d; ++i) {
      const double lij = a(i, j);
      if (lij == 0.0) continue;
      for (std::size_t k = j + 1; k <= i; ++k) a(i, k) -= lij * a(k, j);
    }
  }
  out.l = Matrix(d, d);
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) out.l(i, j) = a(i, j);
    dmin = std::min(dmin, a(i, i));
    dmax = std::max(dmax, a(i, i));
  }
  out.condition = d == 0 ? 1.0 : (dmax / dmin) * (dmax / dmin);
  return true;
}

inline CholeskyFactor cholesky(const Matrix& m, std::string_view name) {
  if (m.rows() != m.cols())
    fail(ErrorKind::LayoutError, std::string(name) + " is not square");
  CholeskyFactor f;
  if (!try_cholesky(m, /*pivot=*/false, f) && !try_cholesky(m, /*pivot=*/true, f))
    fail(ErrorKind::NearSingular, std::string(name) + " is not positive definite");
  if (f.condition > 1e12)
    fail(ErrorKind::NearSingular,
         std::string(name) + " condition estimate exceeds 1e12");
  return f;
}

inline Vector cholesky_solve(const CholeskyFactor& f, std::span<const double> b) {
  const std::size_t d = f.perm.size();
  Vector y(d), x(d);
  for (std::size_t i = 0; i < d; ++i) {
    double s = b[f.perm[i]];
    for (std::size_t k = 0; k < i; ++k) s -= f.l(i, k) * y[k];
    y[i] = s / f.l(i, i);
  }
  for (std::size_t ii = d; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < d; ++k) s -= f.l(k, ii) * y[k];
    y[ii] = s / f.l(ii, ii);
  }
  for (std::size_t i = 0; i < d; ++i) x[f.perm[i]] = y[i];
  return x;
}

}  // namespace detail

// Factors a positive SEMI-definite covariance into a mixing matrix M with
// cov = M·Mᵀ (rank-revealing pivoted Cholesky; exactly-zero directions give
// zero columns). Used by generators, where degenerate blocks — a zero error
// variance, say — are legitimate. `fail_kind` names the diagnostic raised
// when the input is indefinite.
inline Matrix psd_mixing(const Matrix& cov, std::string_view name,
                         ErrorKind fail_kind = ErrorKind::NearSingular) {
  const std::size_t d = cov.rows();
  if (cov.cols() != d) fail(ErrorKind::LayoutError, std::string(name) + " is not square");
  if (!is_symmetric(cov)) fail(ErrorKind::NotSymmetric, std::string(name));
  Matrix a = cov;
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::abs(a(i, i)));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  std::size_t rank = d;
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t r = j;
    for (std::size_t i = j + 1; i < d; ++i)
      if (a(i, i) > a(r, r)) r = i;
    if (a(r, r) < -tol)
      fail(fail_kind, std::string(name) + " is not positive semi-definite");
    if (a(r, r) <= tol) {
      rank = j;
      break;
    }
    if (r != j) {
      for (std::size_t k = 0; k < d; ++k) std::swap(a(j, k), a(r, k));
      for (std::size_t k = 0; k < d; ++k) std::swap(a(k, j), a(k, r));
      std::swap(perm[j], perm[r]);
    }
    const double root = std::sqrt(a(j, j));
    a(j, j) = root;
    for (std::size_t i = j + 1; i < d; ++i) a(i, j) /= root;
    for (std::size_t i = j + 1; i < d; ++i) {
      const double lij = a(i, j);
      if (lij == 0.0) continue;
      for (std::size_t k = j + 1; k <= i; ++k) a(i, k) -= lij * a(k, j);
    }
  }
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < std::min(i + 1, rank); ++j) m(perm[i], j) = a(i, j);
  return m;
}

// Solves m·x = rhs for symmetric positive definite m. `name` appears in the
// NearSingular diagnostic so callers can tell which moment block failed.
inline Vector solve_symmetric(const Matrix& m, const Vector& rhs,
                              std::string_view name = "matrix") {
  if (!is_symmetric(m)) fail(ErrorKind::NotSymmetric, std::string(name));
  if (m.rows() != rhs.size())
    fail(ErrorKind::LayoutError, std::string(name) + " right-hand side shape mismatch");
  const auto f = detail::cholesky(m, name);
  return detail::cholesky_solve(f, rhs);
}

inline Matrix solve_symmetric(const Matrix& m, const Matrix& rhs,
                              std::string_view name = "matrix") {
  if (!is_symmetric(m)) fail(ErrorKind::NotSymmetric, std::string(name));
  if (m.rows() != rhs.rows())
    fail(ErrorKind::LayoutError, std::string(name) + " right-hand side shape mismatch");
  const auto f = detail::cholesky(m, name);
  Matrix x(rhs.rows(), rhs.cols());
  Vector column(rhs.rows());
  for (std::size_t j = 0; j < rhs.cols(); ++j) {
    for (std::size_t i = 0; i < rhs.rows(); ++i) column[i] = rhs(i, j);
    const Vector xj = detail::cholesky_solve(f, column);
    for (std::size_t i = 0; i < rhs.rows(); ++i) x(i, j) = xj[i];
  }
  return x;
}

inline Matrix inverse_symmetric(const Matrix& m, std::string_view name = "matrix") {
  return solve_symmetric(m, Matrix::identity(m.rows()), name);
}

// Gaussian elimination with partial pivoting for general square systems.
// The averaged-Jacobian matrix in the robust variance step is not symmetric,
// so it cannot go through the Cholesky path.
inline Matrix solve_general(Matrix a, Matrix rhs, std::string_view name = "matrix") {
  const std::size_t d = a.rows();
  if (a.cols() != d) fail(ErrorKind::LayoutError, std::string(name) + " is not square");
  if (rhs.rows() != d)
    fail(ErrorKind::LayoutError, std::string(name) + " right-hand side shape mismatch");
  const double scale = std::max(1.0, max_abs(a));
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t r = j;
    for (std::size_t i = j + 1; i < d; ++i)
      if (std::abs(a(i, j)) > std::abs(a(r, j))) r = i;
    if (std::abs(a(r, j)) < 1e-14 * scale)
      fail(ErrorKind::NearSingular, std::string(name) + " pivot collapsed");
    if (r != j) {
      for (std::size_t k = 0; k < d; ++k) std::swap(a(j, k), a(r, k));
      for (std::size_t k = 0; k < rhs.cols(); ++k) std::swap(rhs(j, k), rhs(r, k));
    }
    for (std::size_t i = j + 1; i < d; ++i) {
      const double factor = a(i, j) / a(j, j);
      if (factor == 0.0) continue;
      a(i, j) = 0.0;
      for (std::size_t k = j + 1; k < d; ++k) a(i, k) -= factor * a(j, k);
      for (std::size_t k = 0; k < rhs.cols(); ++k) rhs(i, k) -= factor * rhs(j, k);
    }
  }
  Matrix x(d, rhs.cols());
  for (std::size_t jj = d; jj-- > 0;) {
    for (std::size_t k = 0; k < rhs.cols(); ++k) {
      double s = rhs(jj, k);
      for (std::size_t c = jj + 1; c < d; ++c) s -= a(jj, c) * x(c, k);
      x(jj, k) = s / a(jj, jj);
    }
  }
  return x;
}

inline Vector solve_general(const Matrix& a, const Vector& rhs,
                            std::string_view name = "matrix") {
  Matrix b(rhs.size(), 1);
  for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
  const Matrix x = solve_general(a, b, name);
  Vector out(rhs.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) out[i] = x(i, 0);
  return out;
}

}  // namespace errcal
