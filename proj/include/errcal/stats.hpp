#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "errcal/error.hpp"
#include "errcal/matrix.hpp"

namespace errcal {

struct SampleMoments {
  Vector mean;
  Matrix cov;  // divisor n (plug-in convention)
  std::size_t n = 0;
};

// Plug-in mean and covariance (divisor n, not n−1). The estimating-equation
// stack is built around moments whose sample versions sum exactly to zero at
// the estimate, which requires the divisor-n convention throughout.
inline SampleMoments sample_moments(const std::vector<Vector>& samples) {
  if (samples.size() < 2)
    fail(ErrorKind::InsufficientData, "moments need at least 2 samples");
  const std::size_t n = samples.size();
  const std::size_t d = samples.front().size();
  SampleMoments out;
  out.n = n;
  out.mean.assign(d, 0.0);
  for (const auto& s : samples) {
    if (s.size() != d) fail(ErrorKind::LayoutError, "ragged sample list");
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += s[j];
  }
  for (std::size_t j = 0; j < d; ++j) out.mean[j] /= static_cast<double>(n);
  out.cov = Matrix(d, d);
  Vector c(d);
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < d; ++j) c[j] = s[j] - out.mean[j];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) out.cov(i, j) += c[i] * c[j];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      out.cov(i, j) /= static_cast<double>(n);
      out.cov(j, i) = out.cov(i, j);
    }
  return out;
}

struct OlsFit {
  Vector beta;
  Matrix xtx_inv;      // (XᵀX)⁻¹
  double sigma2 = 0.0; // residual variance, divisor n−k
  std::size_t n = 0;
  std::size_t k = 0;

  // Classical homoskedastic coefficient covariance.
  Matrix vcov() const { return sigma2 * xtx_inv; }
  Vector se() const {
    Vector s(k);
    for (std::size_t j = 0; j < k; ++j) s[j] = std::sqrt(sigma2 * xtx_inv(j, j));
    return s;
  }
};

// Streaming least squares via normal equations. Rows are accumulated one at a
// time so callers never materialize a design matrix for large cohorts.
class OlsAccumulator {
 public:
  explicit OlsAccumulator(std::size_t k) : k_(k), xtx_(k, k), xty_(k, 0.0) {}

  void add(std::span<const double> x, double y) {
    for (std::size_t i = 0; i < k_; ++i) {
      xty_[i] += x[i] * y;
      for (std::size_t j = i; j < k_; ++j) xtx_(i, j) += x[i] * x[j];
    }
    yty_ += y * y;
    ++n_;
  }

  std::size_t count() const { return n_; }

  OlsFit solve() const {
    if (n_ < k_) fail(ErrorKind::RankDeficient, "fewer rows than coefficients");
    Matrix full = xtx_;
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < i; ++j) full(i, j) = full(j, i);
    OlsFit fit;
    fit.n = n_;
    fit.k = k_;
    try {
      fit.xtx_inv = inverse_symmetric(full, "normal equations");
    } catch (const Error& e) {
      fail(ErrorKind::RankDeficient, e.what());
    }
    fit.beta = fit.xtx_inv * xty_;
    double rss = yty_;
    for (std::size_t j = 0; j < k_; ++j) rss -= fit.beta[j] * xty_[j];
    rss = std::max(rss, 0.0);
    fit.sigma2 = n_ > k_ ? rss / static_cast<double>(n_ - k_) : 0.0;
    return fit;
  }

 private:
  std::size_t k_ = 0;
  std::size_t n_ = 0;
  Matrix xtx_;
  Vector xty_;
  double yty_ = 0.0;
};

inline OlsFit ols_fit(const Matrix& design, const Vector& response) {
  if (design.rows() != response.size())
    fail(ErrorKind::LayoutError, "design and response lengths differ");
  OlsAccumulator acc(design.cols());
  for (std::size_t i = 0; i < design.rows(); ++i) acc.add(design.row(i), response[i]);
  return acc.solve();
}

inline Vector ols(const Matrix& design, const Vector& response) {
  return ols_fit(design, response).beta;
}

}  // namespace errcal
