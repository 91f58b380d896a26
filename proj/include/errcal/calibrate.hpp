#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errcal/error.hpp"
#include "errcal/matrix.hpp"
#include "errcal/nuisance.hpp"
#include "errcal/records.hpp"
#include "errcal/stats.hpp"

namespace errcal {

// A fitted regression with its method tag and the nuisance stack that
// produced it. beta is ordered (intercept, beta_x…, beta_z…). vcov is filled
// by whichever variance estimator the caller chose (classical least squares
// for the benchmark fits; robust or bootstrap for the calibrated ones).
struct CalibrationFit {
  Vector beta;
  std::optional<Matrix> vcov;
  std::string method;
  NuisanceEstimates nuisance;
  std::size_t n_used = 0;
};

namespace detail {

[[noreturn]] inline void degenerate(const Error& e) {
  fail(ErrorKind::DegenerateNuisance, e.what());
}

// Best-linear-predictor weights for the replicate design. Singleton subjects
// predict X from (x_star, z); paired subjects predict from both replicates
// jointly, and each replicate outcome gets its own error-projection weight.
struct Case1Weights {
  bool zero_error = false;
  Matrix x_w;       // p×(p+q)
  Vector c_w;       // p+q
  Matrix x_w_pair;  // p×(2p+q)
  Vector c1_w, c2_w;  // 2p+q
};

inline Case1Weights case1_weights(const NuisanceEstimates& nu) {
  const std::size_t p = nu.mu_xstar.size(), q = nu.mu_z.size();
  Case1Weights w;
  if (nu.zero_covariate_error()) {
    w.zero_error = true;
    return w;
  }
  const Matrix sigma_x = nu.sigma_xstar - nu.sigma_T;

  Matrix m(p + q, p + q);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) m(a, b) = nu.sigma_xstar(a, b);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < q; ++b) {
      m(a, p + b) = nu.sigma_xstar_z(a, b);
      m(p + b, a) = nu.sigma_xstar_z(a, b);
    }
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = 0; b < q; ++b) m(p + a, p + b) = nu.sigma_z(a, b);

  Matrix rhs_x(p + q, p);  // transposed target rows for the X predictor
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) rhs_x(b, a) = sigma_x(a, b);
    for (std::size_t b = 0; b < q; ++b) rhs_x(p + b, a) = nu.sigma_xstar_z(a, b);
  }
  Vector rhs_c(p + q, 0.0);
  for (std::size_t a = 0; a < p; ++a) rhs_c[a] = nu.sigma_T_Ttilde[a];
  try {
    w.x_w = transpose(solve_symmetric(m, rhs_x, "measured-moment matrix"));
    w.c_w = solve_symmetric(m, rhs_c, "measured-moment matrix");
  } catch (const Error& e) {
    degenerate(e);
  }

  const std::size_t d3 = 2 * p + q;
  Matrix m3(d3, d3);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) {
      m3(a, b) = nu.sigma_xstar(a, b);
      m3(p + a, p + b) = nu.sigma_xstar(a, b);
      m3(a, p + b) = sigma_x(a, b);
      m3(p + a, b) = sigma_x(a, b);
    }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < q; ++b) {
      m3(a, 2 * p + b) = nu.sigma_xstar_z(a, b);
      m3(p + a, 2 * p + b) = nu.sigma_xstar_z(a, b);
      m3(2 * p + b, a) = nu.sigma_xstar_z(a, b);
      m3(2 * p + b, p + a) = nu.sigma_xstar_z(a, b);
    }
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = 0; b < q; ++b) m3(2 * p + a, 2 * p + b) = nu.sigma_z(a, b);

  Matrix rhs_xp(d3, p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      rhs_xp(b, a) = sigma_x(a, b);
      rhs_xp(p + b, a) = sigma_x(a, b);
    }
    for (std::size_t b = 0; b < q; ++b) rhs_xp(2 * p + b, a) = nu.sigma_xstar_z(a, b);
  }
  Vector rhs_c1(d3, 0.0), rhs_c2(d3, 0.0);
  for (std::size_t a = 0; a < p; ++a) {
    rhs_c1[a] = nu.sigma_T_Ttilde[a];
    rhs_c2[p + a] = nu.sigma_T_Ttilde[a];
  }
  try {
    w.x_w_pair = transpose(solve_symmetric(m3, rhs_xp, "paired-moment matrix"));
    w.c1_w = solve_symmetric(m3, rhs_c1, "paired-moment matrix");
    w.c2_w = solve_symmetric(m3, rhs_c2, "paired-moment matrix");
  } catch (const Error& e) {
    degenerate(e);
  }
  return w;
}

// Emits the calibrated regression rows for one replicate-design subject:
// emit(design_row, response) with design_row = (1, xhat…, z…). A paired
// subject contributes one row per replicate outcome (same xhat); when the
// error covariance estimate is exactly zero the calibration is the identity
// and each subject contributes a single replicate-mean row.
template <typename Emit>
void case1_rows(const SubjectRecord& rec, const NuisanceEstimates& nu,
                const Case1Weights& w, Emit&& emit) {
  const std::size_t p = nu.mu_xstar.size(), q = nu.mu_z.size();
  Vector row(1 + p + q);
  row[0] = 1.0;
  for (std::size_t c = 0; c < q; ++c) row[1 + p + c] = rec.z[c];

  if (w.zero_error) {
    const Vector mx = replicate_mean_x(rec, p);
    for (std::size_t c = 0; c < p; ++c) row[1 + c] = mx[c];
    emit(row, replicate_mean_y(rec));
    return;
  }

  if (rec.replicates() == 1) {
    Vector d(p + q);
    for (std::size_t c = 0; c < p; ++c) d[c] = rec.x_star[c] - nu.mu_xstar[c];
    for (std::size_t c = 0; c < q; ++c) d[p + c] = rec.z[c] - nu.mu_z[c];
    for (std::size_t a = 0; a < p; ++a) {
      double v = nu.mu_xstar[a];
      for (std::size_t c = 0; c < p + q; ++c) v += w.x_w(a, c) * d[c];
      row[1 + a] = v;
    }
    double c_hat = 0.0;
    for (std::size_t c = 0; c < p + q; ++c) c_hat += w.c_w[c] * d[c];
    emit(row, rec.y_star[0] - c_hat);
    return;
  }

  Vector d(2 * p + q);
  for (std::size_t c = 0; c < p; ++c) {
    d[c] = rec.x_star[c] - nu.mu_xstar[c];
    d[p + c] = rec.x_star[p + c] - nu.mu_xstar[c];
  }
  for (std::size_t c = 0; c < q; ++c) d[2 * p + c] = rec.z[c] - nu.mu_z[c];
  for (std::size_t a = 0; a < p; ++a) {
    double v = nu.mu_xstar[a];
    for (std::size_t c = 0; c < 2 * p + q; ++c) v += w.x_w_pair(a, c) * d[c];
    row[1 + a] = v;
  }
  double c1 = 0.0, c2 = 0.0;
  for (std::size_t c = 0; c < 2 * p + q; ++c) {
    c1 += w.c1_w[c] * d[c];
    c2 += w.c2_w[c] * d[c];
  }
  emit(row, rec.y_star[0] - c1);
  emit(row, rec.y_star[1] - c2);
}

// Best-linear-predictor weights for the validation design.
struct Case2Weights {
  bool zero_error = false;
  Matrix x_w;  // p×(p+q)
  Vector c_w;  // p+q
};

inline Case2Weights case2_weights(const NuisanceEstimates& nu) {
  const std::size_t p = nu.mu_xstar.size(), q = nu.mu_z.size();
  Case2Weights w;
  if (nu.zero_error_validation()) {
    w.zero_error = true;
    return w;
  }
  Matrix m(p + q, p + q);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) m(a, b) = nu.sigma_xstar(a, b);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < q; ++b) {
      m(a, p + b) = nu.sigma_xstar_z(a, b);
      m(p + b, a) = nu.sigma_xstar_z(a, b);
    }
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = 0; b < q; ++b) m(p + a, p + b) = nu.sigma_z(a, b);

  const Matrix sigma_x = nu.sigma_xstar - nu.sigma_T;
  Matrix rhs_x(p + q, p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) rhs_x(b, a) = sigma_x(a, b);
    for (std::size_t b = 0; b < q; ++b) rhs_x(p + b, a) = nu.sigma_x_z(a, b);
  }
  Vector rhs_c(p + q);
  for (std::size_t a = 0; a < p; ++a) rhs_c[a] = nu.sigma_T_Ttilde[a];
  for (std::size_t b = 0; b < q; ++b) rhs_c[p + b] = nu.sigma_Ttilde_z[b];
  try {
    w.x_w = transpose(solve_symmetric(m, rhs_x, "measured-moment matrix"));
    w.c_w = solve_symmetric(m, rhs_c, "measured-moment matrix");
  } catch (const Error& e) {
    degenerate(e);
  }
  return w;
}

template <typename Emit>
void case2_rows(const SubjectRecord& rec, const NuisanceEstimates& nu,
                const Case2Weights& w, Emit&& emit) {
  const std::size_t p = nu.mu_xstar.size(), q = nu.mu_z.size();
  Vector row(1 + p + q);
  row[0] = 1.0;
  for (std::size_t c = 0; c < q; ++c) row[1 + p + c] = rec.z[c];
  if (w.zero_error) {
    for (std::size_t c = 0; c < p; ++c) row[1 + c] = rec.x_star[c];
    emit(row, rec.y_star[0]);
    return;
  }
  Vector d(p + q);
  for (std::size_t c = 0; c < p; ++c) d[c] = rec.x_star[c] - nu.mu_xstar[c];
  for (std::size_t c = 0; c < q; ++c) d[p + c] = rec.z[c] - nu.mu_z[c];
  for (std::size_t a = 0; a < p; ++a) {
    double v = nu.mu_xstar[a];
    for (std::size_t c = 0; c < p + q; ++c) v += w.x_w(a, c) * d[c];
    row[1 + a] = v;
  }
  double c_hat = nu.mu_Ttilde;
  for (std::size_t c = 0; c < p + q; ++c) c_hat += w.c_w[c] * d[c];
  emit(row, rec.y_star[0] - c_hat);
}

template <typename Emit>
void case3_rows(const SubjectRecord& rec, const NuisanceEstimates& nu, Emit&& emit) {
  const std::size_t p = nu.case3_alpha.cols();
  const std::size_t k = nu.case3_alpha.rows();  // 1+p+q
  const std::size_t q = k - 1 - p;
  Vector basis(k);
  basis[0] = 1.0;
  for (std::size_t c = 0; c < p; ++c) basis[1 + c] = rec.x_star[c];
  for (std::size_t c = 0; c < q; ++c) basis[1 + p + c] = rec.z[c];
  Vector row(1 + p + q);
  row[0] = 1.0;
  for (std::size_t a = 0; a < p; ++a) {
    double v = 0.0;
    for (std::size_t c = 0; c < k; ++c) v += nu.case3_alpha(c, a) * basis[c];
    row[1 + a] = v;
  }
  for (std::size_t c = 0; c < q; ++c) row[1 + p + c] = rec.z[c];
  double c_hat = 0.0;
  for (std::size_t c = 0; c < k; ++c) c_hat += nu.case3_c[c] * basis[c];
  emit(row, rec.y_star[0] - c_hat);
}

}  // namespace detail

// Calibrated regression for the replicate (reliability) design.
inline CalibrationFit calibrate_case1(std::span<const SubjectRecord> data) {
  const DataDims dims = check_dims(data);
  NuisanceEstimates nu = nuisance_case1(data);
  const detail::Case1Weights w = detail::case1_weights(nu);
  OlsAccumulator acc(1 + dims.p + dims.q);
  for (const auto& rec : data)
    detail::case1_rows(rec, nu, w,
                       [&](const Vector& row, double y) { acc.add(row, y); });
  CalibrationFit fit;
  fit.beta = acc.solve().beta;
  fit.method = "rc_case1";
  fit.nuisance = std::move(nu);
  fit.n_used = dims.n_records;
  return fit;
}

// Calibrated regression for the validation design.
inline CalibrationFit calibrate_case2(std::span<const SubjectRecord> data) {
  const DataDims dims = check_dims(data);
  NuisanceEstimates nu = nuisance_case2(data);
  const detail::Case2Weights w = detail::case2_weights(nu);
  OlsAccumulator acc(1 + dims.p + dims.q);
  for (const auto& rec : data)
    detail::case2_rows(rec, nu, w,
                       [&](const Vector& row, double y) { acc.add(row, y); });
  CalibrationFit fit;
  fit.beta = acc.solve().beta;
  fit.method = "rc_case2";
  fit.nuisance = std::move(nu);
  fit.n_used = dims.n_records;
  return fit;
}

// Subset least-squares blocks for the biomarker design: the biomarker
// covariate, and the measurement-minus-biomarker outcome gap, each regressed
// on (1, x_star, z) over the subset.
inline NuisanceEstimates nuisance_case3(std::span<const SubjectRecord> data) {
  const DataDims dims = check_dims(data);
  const std::size_t p = dims.p, q = dims.q, k = 1 + p + q;
  if (dims.n_subset < k + 1)
    fail(ErrorKind::InsufficientData,
         "biomarker design needs a subset larger than the regression dimension");
  std::vector<OlsAccumulator> alpha_acc(p, OlsAccumulator(k));
  OlsAccumulator c_acc(k);
  Vector basis(k);
  for (const auto& rec : data) {
    if (rec.replicates() != 1)
      fail(ErrorKind::LayoutError, "biomarker design expects single replicates");
    if (!rec.in_subset) continue;
    if (rec.x_bio.size() != p || !rec.y_bio.has_value())
      fail(ErrorKind::InsufficientData, "subset record lacks biomarker measurements");
    basis[0] = 1.0;
    for (std::size_t c = 0; c < p; ++c) basis[1 + c] = rec.x_star[c];
    for (std::size_t c = 0; c < q; ++c) basis[1 + p + c] = rec.z[c];
    for (std::size_t a = 0; a < p; ++a) alpha_acc[a].add(basis, rec.x_bio[a]);
    c_acc.add(basis, rec.y_star[0] - *rec.y_bio);
  }
  NuisanceEstimates nu;
  nu.n_records = dims.n_records;
  nu.n_subset = dims.n_subset;
  nu.mu_xstar.assign(p, 0.0);
  nu.mu_z.assign(q, 0.0);
  nu.case3_alpha = Matrix(k, p);
  for (std::size_t a = 0; a < p; ++a) {
    const Vector beta = alpha_acc[a].solve().beta;
    for (std::size_t c = 0; c < k; ++c) nu.case3_alpha(c, a) = beta[c];
  }
  nu.case3_c = c_acc.solve().beta;
  return nu;
}

// Calibrated regression for the biomarker design.
inline CalibrationFit calibrate_case3(std::span<const SubjectRecord> data) {
  const DataDims dims = check_dims(data);
  NuisanceEstimates nu = nuisance_case3(data);
  OlsAccumulator acc(1 + dims.p + dims.q);
  for (const auto& rec : data)
    detail::case3_rows(rec, nu,
                       [&](const Vector& row, double y) { acc.add(row, y); });
  CalibrationFit fit;
  fit.beta = acc.solve().beta;
  fit.method = "rc_case3";
  fit.nuisance = std::move(nu);
  fit.n_used = dims.n_records;
  return fit;
}

// Uncorrected benchmark: least squares on the first replicate of (x_star,
// y_star). Classical variance.
inline CalibrationFit naive_fit(std::span<const SubjectRecord> data) {
  const DataDims dims = check_dims(data);
  OlsAccumulator acc(1 + dims.p + dims.q);
  Vector row(1 + dims.p + dims.q);
  for (const auto& rec : data) {
    row[0] = 1.0;
    for (std::size_t c = 0; c < dims.p; ++c) row[1 + c] = rec.x_star[c];
    for (std::size_t c = 0; c < dims.q; ++c) row[1 + dims.p + c] = rec.z[c];
    acc.add(row, rec.y_star[0]);
  }
  const OlsFit ls = acc.solve();
  CalibrationFit fit;
  fit.beta = ls.beta;
  fit.vcov = ls.vcov();
  fit.method = "naive";
  fit.n_used = dims.n_records;
  return fit;
}

// Oracle benchmark: least squares on the simulation ground truth. Only
// available when every record carries it.
inline CalibrationFit true_fit(std::span<const SubjectRecord> data) {
  const DataDims dims = check_dims(data);
  OlsAccumulator acc(1 + dims.p + dims.q);
  Vector row(1 + dims.p + dims.q);
  for (const auto& rec : data) {
    if (rec.x_true.size() != dims.p || !rec.y_true.has_value())
      fail(ErrorKind::InsufficientData, "ground truth is not available on every record");
    row[0] = 1.0;
    for (std::size_t c = 0; c < dims.p; ++c) row[1 + c] = rec.x_true[c];
    for (std::size_t c = 0; c < dims.q; ++c) row[1 + dims.p + c] = rec.z[c];
    acc.add(row, *rec.y_true);
  }
  const OlsFit ls = acc.solve();
  CalibrationFit fit;
  fit.beta = ls.beta;
  fit.vcov = ls.vcov();
  fit.method = "true";
  fit.n_used = dims.n_records;
  return fit;
}

// Method-of-moments comparator: subtracts the estimated error moments from
// the cross- and design-moment blocks and solves the corrected normal
// equations directly. Shares the nuisance stack with the calibrated fits.
inline CalibrationFit moment_correction(std::span<const SubjectRecord> data,
                                        Design design) {
  if (design == Design::biomarker)
    fail(ErrorKind::InvalidScenario,
         "moment correction supports the replicate and validation designs");
  const DataDims dims = check_dims(data);
  const std::size_t p = dims.p, q = dims.q;
  NuisanceEstimates nu =
      design == Design::reliability ? nuisance_case1(data) : nuisance_case2(data);

  // Cross moments of the measurements with the outcome. The replicate design
  // pools replicate rows (divisor N+n) around the replicate-mean averages;
  // the validation design uses plain cohort moments (divisor N).
  double mu_ystar = 0.0;
  for (const auto& rec : data) mu_ystar += detail::replicate_mean_y(rec);
  mu_ystar /= static_cast<double>(dims.n_records);

  Vector sxy(p, 0.0), szy(q, 0.0);
  double pooled_rows = 0.0;
  for (const auto& rec : data) {
    for (std::size_t j = 0; j < rec.replicates(); ++j) {
      const double dy = rec.y_star[j] - mu_ystar;
      for (std::size_t a = 0; a < p; ++a)
        sxy[a] += (rec.x_star[j * p + a] - nu.mu_xstar[a]) * dy;
      for (std::size_t b = 0; b < q; ++b) szy[b] += (rec.z[b] - nu.mu_z[b]) * dy;
      pooled_rows += 1.0;
    }
  }
  for (auto& v : sxy) v /= pooled_rows;
  for (auto& v : szy) v /= pooled_rows;

  CalibrationFit fit;
  fit.method = design == Design::reliability ? "mm_case1" : "mm_case2";
  fit.n_used = dims.n_records;

  const bool zero_error = design == Design::reliability
                              ? nu.zero_covariate_error()
                              : nu.zero_error_validation();
  Matrix m(p + q, p + q);
  Vector rhs(p + q);
  if (zero_error) {
    // Identity calibration limit: moments of the replicate means themselves.
    Vector mu_xbar(p, 0.0);
    for (const auto& rec : data) {
      const Vector mx = detail::replicate_mean_x(rec, p);
      for (std::size_t a = 0; a < p; ++a) mu_xbar[a] += mx[a];
    }
    for (auto& v : mu_xbar) v /= static_cast<double>(dims.n_records);
    Matrix sxx(p, p), sxz(p, q);
    Vector sxy0(p, 0.0), szy0(q, 0.0);
    for (const auto& rec : data) {
      const Vector mx = detail::replicate_mean_x(rec, p);
      const double dy = detail::replicate_mean_y(rec) - mu_ystar;
      for (std::size_t a = 0; a < p; ++a) {
        const double da = mx[a] - mu_xbar[a];
        for (std::size_t b = 0; b < p; ++b) sxx(a, b) += da * (mx[b] - mu_xbar[b]);
        for (std::size_t b = 0; b < q; ++b) sxz(a, b) += da * (rec.z[b] - nu.mu_z[b]);
        sxy0[a] += da * dy;
      }
      for (std::size_t b = 0; b < q; ++b) szy0[b] += (rec.z[b] - nu.mu_z[b]) * dy;
    }
    const double dn = static_cast<double>(dims.n_records);
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < p; ++b) m(a, b) = sxx(a, b) / dn;
      for (std::size_t b = 0; b < q; ++b) {
        m(a, p + b) = sxz(a, b) / dn;
        m(p + b, a) = sxz(a, b) / dn;
      }
      rhs[a] = sxy0[a] / dn;
    }
    for (std::size_t a = 0; a < q; ++a) {
      for (std::size_t b = 0; b < q; ++b) m(p + a, p + b) = nu.sigma_z(a, b);
      rhs[p + a] = szy0[a] / dn;
    }
    try {
      const Vector slope = solve_symmetric(m, rhs, "corrected design moments");
      fit.beta.assign(1 + p + q, 0.0);
      double intercept = mu_ystar;
      for (std::size_t a = 0; a < p; ++a) {
        fit.beta[1 + a] = slope[a];
        intercept -= slope[a] * mu_xbar[a];
      }
      for (std::size_t b = 0; b < q; ++b) {
        fit.beta[1 + p + b] = slope[p + b];
        intercept -= slope[p + b] * nu.mu_z[b];
      }
      fit.beta[0] = intercept;
    } catch (const Error& e) {
      detail::degenerate(e);
    }
    fit.nuisance = std::move(nu);
    return fit;
  }

  const Matrix sigma_x = nu.sigma_xstar - nu.sigma_T;
  const Matrix& sxz_block =
      design == Design::reliability ? nu.sigma_xstar_z : nu.sigma_x_z;
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) m(a, b) = sigma_x(a, b);
    for (std::size_t b = 0; b < q; ++b) {
      m(a, p + b) = sxz_block(a, b);
      m(p + b, a) = sxz_block(a, b);
    }
    rhs[a] = sxy[a] - nu.sigma_T_Ttilde[a];
  }
  for (std::size_t a = 0; a < q; ++a) {
    for (std::size_t b = 0; b < q; ++b) m(p + a, p + b) = nu.sigma_z(a, b);
    rhs[p + a] = szy[a] - (design == Design::validation ? nu.sigma_Ttilde_z[a] : 0.0);
  }
  try {
    const Vector slope = solve_symmetric(m, rhs, "corrected design moments");
    fit.beta.assign(1 + p + q, 0.0);
    double intercept = mu_ystar - (design == Design::validation ? nu.mu_Ttilde : 0.0);
    for (std::size_t a = 0; a < p; ++a) {
      fit.beta[1 + a] = slope[a];
      intercept -= slope[a] * nu.mu_xstar[a];
    }
    for (std::size_t b = 0; b < q; ++b) {
      fit.beta[1 + p + b] = slope[p + b];
      intercept -= slope[p + b] * nu.mu_z[b];
    }
    fit.beta[0] = intercept;
  } catch (const Error& e) {
    detail::degenerate(e);
  }
  fit.nuisance = std::move(nu);
  return fit;
}

// Dispatches the calibrated fit for a design.
inline CalibrationFit rc_fit(std::span<const SubjectRecord> data, Design design) {
  switch (design) {
    case Design::reliability: return calibrate_case1(data);
    case Design::validation: return calibrate_case2(data);
    case Design::biomarker: return calibrate_case3(data);
  }
  fail(ErrorKind::InvalidScenario, "unhandled design");
}

}  // namespace errcal
