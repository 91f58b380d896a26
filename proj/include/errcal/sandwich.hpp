#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>

#include "errcal/calibrate.hpp"
#include "errcal/error.hpp"
#include "errcal/matrix.hpp"
#include "errcal/psi.hpp"
#include "errcal/records.hpp"

namespace errcal {

// Robust (sandwich) variance of a stacked M-estimator:
//   vcov = A⁻¹ B A⁻ᵀ / N,  A = −(1/N) Σ ∂ψ_i/∂θ,  B = (1/N) Σ ψ_i ψ_iᵀ.
struct SandwichResult {
  Matrix vcov;       // full parameter dimension
  Matrix beta_vcov;  // leading (1+p+q)² block
  Matrix a_matrix;
  Matrix b_matrix;
  double psi_residual_norm = 0.0;  // ‖Σψ(θ̂)‖∞ / N at the θ used
};

struct SandwichOptions {
  double root_tol = 1e-6;   // bound on ‖Σψ‖∞/N before differentiating
  bool refine = true;       // damped Newton toward the root if the bound fails
  int stencil = 2;          // central differences: 2- or 4-point per coordinate
  std::size_t max_refine_steps = 30;
};

namespace detail {

inline double step_size(double coord) {
  return std::max(1e-5, 1e-5 * std::abs(coord));
}

inline double inf_norm(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

// Generic engine over any per-unit estimating function. make_psi(theta) must
// return a callable mapping a unit index to its ψ vector; construction may
// cache whatever depends only on theta.
template <typename MakePsi>
SandwichResult sandwich_generic(MakePsi&& make_psi, std::size_t n_units,
                                std::size_t dim, Vector theta,
                                std::size_t beta_dim,
                                const SandwichOptions& opt = {}) {
  if (n_units < 2)
    fail(ErrorKind::InsufficientData, "sandwich variance needs at least 2 units");
  const double n = static_cast<double>(n_units);

  const auto mean_psi = [&](const Vector& at) {
    Vector r(dim, 0.0);
    const auto psi_of = make_psi(at);
    for (std::size_t i = 0; i < n_units; ++i) {
      const Vector v = psi_of(i);
      for (std::size_t c = 0; c < dim; ++c) r[c] += v[c];
    }
    for (auto& x : r) x /= n;
    return r;
  };

  // J(θ) = ∂(mean ψ)/∂θ by column-wise central differences.
  const auto jacobian = [&](const Vector& at) {
    Matrix j(dim, dim);
    Vector shifted = at;
    for (std::size_t col = 0; col < dim; ++col) {
      const double h = detail::step_size(at[col]);
      shifted[col] = at[col] + h;
      const Vector up = mean_psi(shifted);
      shifted[col] = at[col] - h;
      const Vector dn = mean_psi(shifted);
      if (opt.stencil == 4) {
        shifted[col] = at[col] + 2.0 * h;
        const Vector up2 = mean_psi(shifted);
        shifted[col] = at[col] - 2.0 * h;
        const Vector dn2 = mean_psi(shifted);
        for (std::size_t r = 0; r < dim; ++r)
          j(r, col) =
              (8.0 * (up[r] - dn[r]) - (up2[r] - dn2[r])) / (12.0 * h);
      } else {
        for (std::size_t r = 0; r < dim; ++r) j(r, col) = (up[r] - dn[r]) / (2.0 * h);
      }
      shifted[col] = at[col];
    }
    return j;
  };

  Vector r = mean_psi(theta);
  double rnorm = detail::inf_norm(r);
  if (rnorm > opt.root_tol) {
    if (!opt.refine)
      fail(ErrorKind::PsiNotRoot,
           "estimating equations are not at a root (residual " +
               std::to_string(rnorm) + ")");
    for (std::size_t it = 0; it < opt.max_refine_steps && rnorm > opt.root_tol; ++it) {
      const Matrix j = jacobian(theta);
      const Vector delta = solve_general(j, r, "estimating-equation Jacobian");
      bool improved = false;
      for (double lambda = 1.0; lambda >= 1e-4; lambda *= 0.5) {
        Vector trial = theta;
        for (std::size_t c = 0; c < dim; ++c) trial[c] -= lambda * delta[c];
        const Vector rt = mean_psi(trial);
        const double tn = detail::inf_norm(rt);
        if (tn < rnorm) {
          theta = std::move(trial);
          r = rt;
          rnorm = tn;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (rnorm > opt.root_tol)
      fail(ErrorKind::PsiNotRoot,
           "refinement did not reach the estimating-equation root (residual " +
               std::to_string(rnorm) + ")");
  }

  SandwichResult out;
  out.psi_residual_norm = rnorm;
  out.a_matrix = Matrix(dim, dim);
  const Matrix j = jacobian(theta);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) out.a_matrix(a, b) = -j(a, b);

  out.b_matrix = Matrix(dim, dim);
  {
    const auto psi_of = make_psi(theta);
    for (std::size_t i = 0; i < n_units; ++i) {
      const Vector v = psi_of(i);
      for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = a; b < dim; ++b) out.b_matrix(a, b) += v[a] * v[b];
    }
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = a; b < dim; ++b) {
        out.b_matrix(a, b) /= n;
        out.b_matrix(b, a) = out.b_matrix(a, b);
      }
  }

  const Matrix w = solve_general(out.a_matrix, out.b_matrix, "bread matrix");
  Matrix v = transpose(solve_general(out.a_matrix, transpose(w), "bread matrix"));
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a; b < dim; ++b) {
      const double s = 0.5 * (v(a, b) + v(b, a)) / n;
      v(a, b) = s;
      v(b, a) = s;
    }
  out.vcov = std::move(v);

  out.beta_vcov = Matrix(beta_dim, beta_dim);
  for (std::size_t a = 0; a < beta_dim; ++a)
    for (std::size_t b = 0; b < beta_dim; ++b) out.beta_vcov(a, b) = out.vcov(a, b);
  return out;
}

// Sandwich variance for a fitted design at the packed parameter vector.
inline SandwichResult sandwich(Design design, std::span<const SubjectRecord> data,
                               const ThetaVector& theta_hat,
                               const SandwichOptions& opt = {}) {
  if (theta_hat.layout.design != design)
    fail(ErrorKind::LayoutError, "parameter layout was built for a different design");
  const ThetaLayout& layout = theta_hat.layout;
  const auto make_psi = [&layout, data](const Vector& values) {
    detail::PsiEvaluator ev(layout, values);
    return [ev = std::move(ev), data](std::size_t i) { return ev(data[i]); };
  };
  return sandwich_generic(make_psi, data.size(), layout.dim, theta_hat.values,
                          1 + layout.p + layout.q, opt);
}

inline SandwichResult sandwich(Design design, std::span<const SubjectRecord> data,
                               const CalibrationFit& fit,
                               const SandwichOptions& opt = {}) {
  return sandwich(design, data, theta_from_fit(design, fit), opt);
}

}  // namespace errcal
