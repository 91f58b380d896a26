#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errcal/error.hpp"
#include "errcal/matrix.hpp"
#include "errcal/records.hpp"

namespace errcal {

// Plug-in moment estimates feeding the calibrated regressions. Divisor
// conventions are chosen so that every block is the exact root of its own
// estimating equation (sample sum of "term − estimate" is identically zero):
//
//   replicate design — mu_xstar averages per-subject replicate means over the
//   N subjects; sigma_xstar and sigma_xstar_z pool all N+n replicate rows
//   (divisor N+n) around those means; sigma_z uses divisor N; sigma_T and
//   sigma_T_Ttilde use divisor n over replicate half-differences;
//
//   validation design — cohort blocks use divisor N around cohort means;
//   error blocks use divisor n over the subset with UNCENTERED products
//   (the covariate error is mean-zero by assumption, the outcome error mean
//   is estimated separately as mu_Ttilde);
//
//   biomarker design — case3_alpha and case3_c are least-squares coefficient
//   blocks from the subset regressions of the biomarker covariate, and of
//   the measurement-minus-biomarker outcome gap, on (1, x_star, z).
struct NuisanceEstimates {
  Vector mu_xstar;        // p
  Vector mu_z;            // q
  Matrix sigma_xstar;     // p×p
  Matrix sigma_z;         // q×q
  Matrix sigma_xstar_z;   // p×q
  Matrix sigma_T;         // p×p
  Vector sigma_T_Ttilde;  // p
  double mu_Ttilde = 0.0;     // validation design only
  Vector sigma_Ttilde_z;      // q, validation design only
  Matrix sigma_x_z;           // p×q, validation design only (true x against z)
  Matrix case3_alpha;         // (1+p+q)×p, biomarker design only
  Vector case3_c;             // 1+p+q, biomarker design only
  std::size_t n_records = 0;  // N
  std::size_t n_subset = 0;   // n

  // The replicate stack collapses to an identity calibration exactly when
  // the estimated covariate-error covariance vanishes entirely.
  bool zero_covariate_error() const { return max_abs(sigma_T) == 0.0; }

  // The validation stack collapses only when every error moment vanishes.
  bool zero_error_validation() const {
    if (max_abs(sigma_T) != 0.0 || mu_Ttilde != 0.0) return false;
    for (double v : sigma_T_Ttilde)
      if (v != 0.0) return false;
    for (double v : sigma_Ttilde_z)
      if (v != 0.0) return false;
    return true;
  }
};

namespace detail {

// Mean of a record's replicate measurements, component by component.
inline Vector replicate_mean_x(const SubjectRecord& rec, std::size_t p) {
  Vector m(p, 0.0);
  const std::size_t k = rec.replicates();
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t c = 0; c < p; ++c) m[c] += rec.x_star[j * p + c];
  for (auto& v : m) v /= static_cast<double>(k);
  return m;
}

inline double replicate_mean_y(const SubjectRecord& rec) {
  double m = 0.0;
  for (double y : rec.y_star) m += y;
  return m / static_cast<double>(rec.replicates());
}

}  // namespace detail

// Moment stack for the replicate (reliability) design. Subjects carrying two
// replicates identify the error covariance through half-differences:
// (x1−x2)/√2 has covariance sigma_T, and the cross product with the outcome
// replicates identifies sigma_T_Ttilde.
inline NuisanceEstimates nuisance_case1(std::span<const SubjectRecord> data) {
  const DataDims dims = check_dims(data);
  const std::size_t p = dims.p, q = dims.q, N = dims.n_records;
  NuisanceEstimates nu;
  nu.n_records = N;

  std::size_t n_pairs = 0;
  nu.mu_xstar.assign(p, 0.0);
  nu.mu_z.assign(q, 0.0);
  for (const auto& rec : data) {
    const Vector mx = detail::replicate_mean_x(rec, p);
    for (std::size_t c = 0; c < p; ++c) nu.mu_xstar[c] += mx[c];
    for (std::size_t c = 0; c < q; ++c) nu.mu_z[c] += rec.z[c];
    if (rec.replicates() == 2) ++n_pairs;
  }
  for (auto& v : nu.mu_xstar) v /= static_cast<double>(N);
  for (auto& v : nu.mu_z) v /= static_cast<double>(N);
  nu.n_subset = n_pairs;
  if (n_pairs < 2)
    fail(ErrorKind::InsufficientData,
         "replicate design needs at least 2 subjects with a second replicate");

  nu.sigma_xstar = Matrix(p, p);
  nu.sigma_xstar_z = Matrix(p, q);
  nu.sigma_z = Matrix(q, q);
  nu.sigma_T = Matrix(p, p);
  nu.sigma_T_Ttilde.assign(p, 0.0);
  Vector dx(p), dz(q), dd(p);
  for (const auto& rec : data) {
    for (std::size_t c = 0; c < q; ++c) dz[c] = rec.z[c] - nu.mu_z[c];
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t b = a; b < q; ++b) nu.sigma_z(a, b) += dz[a] * dz[b];
    for (std::size_t j = 0; j < rec.replicates(); ++j) {
      for (std::size_t c = 0; c < p; ++c)
        dx[c] = rec.x_star[j * p + c] - nu.mu_xstar[c];
      for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) nu.sigma_xstar(a, b) += dx[a] * dx[b];
        for (std::size_t b = 0; b < q; ++b) nu.sigma_xstar_z(a, b) += dx[a] * dz[b];
      }
    }
    if (rec.replicates() == 2) {
      for (std::size_t c = 0; c < p; ++c) dd[c] = rec.x_star[c] - rec.x_star[p + c];
      const double dy = rec.y_star[0] - rec.y_star[1];
      for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) nu.sigma_T(a, b) += 0.5 * dd[a] * dd[b];
        nu.sigma_T_Ttilde[a] += 0.5 * dd[a] * dy;
      }
    }
  }
  const double rows = static_cast<double>(N + n_pairs);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      nu.sigma_xstar(a, b) /= rows;
      nu.sigma_xstar(b, a) = nu.sigma_xstar(a, b);
      nu.sigma_T(a, b) /= static_cast<double>(n_pairs);
      nu.sigma_T(b, a) = nu.sigma_T(a, b);
    }
    for (std::size_t b = 0; b < q; ++b) nu.sigma_xstar_z(a, b) /= rows;
    nu.sigma_T_Ttilde[a] /= static_cast<double>(n_pairs);
  }
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = a; b < q; ++b) {
      nu.sigma_z(a, b) /= static_cast<double>(N);
      nu.sigma_z(b, a) = nu.sigma_z(a, b);
    }
  nu.sigma_Ttilde_z.assign(q, 0.0);
  nu.sigma_x_z = Matrix(p, q);
  // The implied error-free variance sigma_xstar − sigma_T must stay
  // nonnegative on the diagonal; a negative entry means the half-difference
  // estimate exceeds the total variance and no valid calibration exists.
  for (std::size_t a = 0; a < p; ++a)
    if (nu.sigma_xstar(a, a) - nu.sigma_T(a, a) < 0.0)
      fail(ErrorKind::DegenerateNuisance,
           "implied error-free variance is negative for x component " +
               std::to_string(a + 1));
  return nu;
}

// Moment stack for the validation design: subset members carry the exact
// (x, y), so the error draws t = x_star − x and ttilde = y_star − y are
// observed directly on the subset.
inline NuisanceEstimates nuisance_case2(std::span<const SubjectRecord> data) {
  const DataDims dims = check_dims(data);
  const std::size_t p = dims.p, q = dims.q, N = dims.n_records;
  NuisanceEstimates nu;
  nu.n_records = N;
  nu.n_subset = dims.n_subset;
  if (dims.n_subset < 2)
    fail(ErrorKind::InsufficientData, "validation design needs a subset of at least 2");

  nu.mu_xstar.assign(p, 0.0);
  nu.mu_z.assign(q, 0.0);
  for (const auto& rec : data) {
    if (rec.replicates() != 1)
      fail(ErrorKind::LayoutError, "validation design expects single replicates");
    if (rec.in_subset && (rec.x_true.size() != p || !rec.y_true.has_value()))
      fail(ErrorKind::InsufficientData, "subset record lacks validation truth");
    for (std::size_t c = 0; c < p; ++c) nu.mu_xstar[c] += rec.x_star[c];
    for (std::size_t c = 0; c < q; ++c) nu.mu_z[c] += rec.z[c];
  }
  for (auto& v : nu.mu_xstar) v /= static_cast<double>(N);
  for (auto& v : nu.mu_z) v /= static_cast<double>(N);

  nu.sigma_xstar = Matrix(p, p);
  nu.sigma_xstar_z = Matrix(p, q);
  nu.sigma_z = Matrix(q, q);
  nu.sigma_T = Matrix(p, p);
  nu.sigma_T_Ttilde.assign(p, 0.0);
  nu.sigma_Ttilde_z.assign(q, 0.0);
  nu.sigma_x_z = Matrix(p, q);
  Vector dx(p), dz(q), t(p);
  for (const auto& rec : data) {
    for (std::size_t c = 0; c < q; ++c) dz[c] = rec.z[c] - nu.mu_z[c];
    for (std::size_t c = 0; c < p; ++c) dx[c] = rec.x_star[c] - nu.mu_xstar[c];
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) nu.sigma_xstar(a, b) += dx[a] * dx[b];
      for (std::size_t b = 0; b < q; ++b) nu.sigma_xstar_z(a, b) += dx[a] * dz[b];
    }
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t b = a; b < q; ++b) nu.sigma_z(a, b) += dz[a] * dz[b];
    if (rec.in_subset) {
      for (std::size_t c = 0; c < p; ++c) t[c] = rec.x_star[c] - rec.x_true[c];
      const double ttilde = rec.y_star[0] - *rec.y_true;
      nu.mu_Ttilde += ttilde;
      for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) nu.sigma_T(a, b) += t[a] * t[b];
        nu.sigma_T_Ttilde[a] += t[a] * ttilde;
        for (std::size_t b = 0; b < q; ++b)
          nu.sigma_x_z(a, b) += (rec.x_true[a] - nu.mu_xstar[a]) * dz[b];
      }
      for (std::size_t b = 0; b < q; ++b) nu.sigma_Ttilde_z[b] += ttilde * dz[b];
    }
  }
  const double dn = static_cast<double>(N);
  const double ds = static_cast<double>(dims.n_subset);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      nu.sigma_xstar(a, b) /= dn;
      nu.sigma_xstar(b, a) = nu.sigma_xstar(a, b);
      nu.sigma_T(a, b) /= ds;
      nu.sigma_T(b, a) = nu.sigma_T(a, b);
    }
    for (std::size_t b = 0; b < q; ++b) {
      nu.sigma_xstar_z(a, b) /= dn;
      nu.sigma_x_z(a, b) /= ds;
    }
    nu.sigma_T_Ttilde[a] /= ds;
  }
  for (std::size_t a = 0; a < q; ++a) {
    for (std::size_t b = a; b < q; ++b) {
      nu.sigma_z(a, b) /= dn;
      nu.sigma_z(b, a) = nu.sigma_z(a, b);
    }
    nu.sigma_Ttilde_z[a] /= ds;
  }
  nu.mu_Ttilde /= ds;
  for (std::size_t a = 0; a < p; ++a)
    if (nu.sigma_xstar(a, a) - nu.sigma_T(a, a) < 0.0)
      fail(ErrorKind::DegenerateNuisance,
           "implied error-free variance is negative for x component " +
               std::to_string(a + 1));
  return nu;
}

}  // namespace errcal
