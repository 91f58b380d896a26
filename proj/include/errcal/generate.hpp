#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "errcal/matrix.hpp"
#include "errcal/records.hpp"
#include "errcal/rng.hpp"
#include "errcal/scenario.hpp"

namespace errcal {

// One draw from the requested error family, standardized to mean 0 and
// variance 1 so that scaling by the covariance factor preserves the spec'd
// second moments for every shape.
inline double standardized_error_draw(ErrorShape shape, Rng& rng) {
  switch (shape) {
    case ErrorShape::gaussian:
      return rng.normal();
    case ErrorShape::normal_mixture: {
      // Equal-weight mixture of N(−1.5σ*, σ*²) and N(+1.5σ*, σ*²) with
      // σ* = 1/√3.25, which makes the total variance exactly 1.
      static const double s = 1.0 / std::sqrt(3.25);
      const double center = (rng.next_u64() & 1ULL) ? 1.5 * s : -1.5 * s;
      return center + s * rng.normal();
    }
    case ErrorShape::log_normal: {
      // exp(N(0, 0.8²)) shifted and scaled to mean 0, variance 1; strongly
      // right-skewed (skewness ≈ +3.6).
      static const double mean = std::exp(0.32);
      static const double sd = std::sqrt((std::exp(0.64) - 1.0) * std::exp(0.64));
      return (std::exp(0.8 * rng.normal()) - mean) / sd;
    }
  }
  fail(ErrorKind::InvalidScenario, "unhandled error shape");
}

namespace detail {

inline Vector affine_sample(const Vector& mu, const Matrix& mix, const Vector& u) {
  Vector out = mix * u;
  for (std::size_t i = 0; i < mu.size(); ++i) out[i] += mu[i];
  return out;
}

}  // namespace detail

// Draws one cohort. Deterministic given (spec, seed): subjects are generated
// in index order, and the truth, measurement-error, and biomarker-error
// streams are separate substreams of the seed, so the latent (X, Z, Y) panel
// is unchanged when only the error model varies. The first subset_n subjects
// form the subset (subjects are exchangeable, so this loses no generality).
inline std::vector<SubjectRecord> generate(const ScenarioSpec& spec, std::uint64_t seed) {
  validate(spec);
  const std::size_t p = spec.p(), q = spec.q();
  const Matrix mix_xz =
      psd_mixing(joint_xz_cov(spec), "joint (X,Z) covariance", ErrorKind::InvalidScenario);
  const Matrix mix_err = psd_mixing(joint_error_cov(spec), "replicate error covariance",
                                    ErrorKind::InvalidScenario);
  const Matrix mix_bio =
      spec.design == Design::biomarker
          ? psd_mixing(joint_bio_cov(spec), "biomarker error covariance",
                       ErrorKind::InvalidScenario)
          : Matrix();

  Rng truth = Rng::stream(seed, {stream_tag::truth});
  Rng meas = Rng::stream(seed, {stream_tag::meas});
  Rng bio = Rng::stream(seed, {stream_tag::bio});

  const auto& err = spec.error;
  const auto sys_x = [&](std::size_t j, const Vector& z) {
    double v = err.systematic_x.alpha0.empty() ? 0.0 : err.systematic_x.alpha0[j];
    if (err.systematic_x.alpha1.rows() == p)
      for (std::size_t k = 0; k < q; ++k) v += err.systematic_x.alpha1(j, k) * z[k];
    return v;
  };
  const auto sys_y = [&](const Vector& z) {
    double v = err.systematic_y.gamma0;
    if (err.systematic_y.gamma1.size() == q)
      for (std::size_t k = 0; k < q; ++k) v += err.systematic_y.gamma1[k] * z[k];
    return v;
  };

  std::vector<SubjectRecord> data(spec.cohort_n);
  Vector u_xz(p + q), u_err(p + 1);
  for (std::size_t i = 0; i < spec.cohort_n; ++i) {
    SubjectRecord& rec = data[i];
    rec.in_subset = i < spec.subset_n;

    for (auto& u : u_xz) u = truth.normal();
    Vector xz = mix_xz * u_xz;
    rec.x_true.assign(xz.begin(), xz.begin() + p);
    for (std::size_t j = 0; j < p; ++j) rec.x_true[j] += spec.mu_x[j];
    rec.z.assign(xz.begin() + p, xz.end());
    for (std::size_t k = 0; k < q; ++k) rec.z[k] += spec.mu_z[k];
    double y = spec.model.beta0 + spec.model.sigma_eps * truth.normal();
    for (std::size_t j = 0; j < p; ++j) y += spec.model.beta_x[j] * rec.x_true[j];
    for (std::size_t k = 0; k < q; ++k) y += spec.model.beta_z[k] * rec.z[k];
    rec.y_true = y;

    const std::size_t replicates =
        (spec.design == Design::reliability && rec.in_subset) ? 2 : 1;
    rec.x_star.reserve(replicates * p);
    for (std::size_t r = 0; r < replicates; ++r) {
      for (auto& u : u_err) u = standardized_error_draw(err.error_shape, meas);
      const Vector te = mix_err * u_err;
      for (std::size_t j = 0; j < p; ++j)
        rec.x_star.push_back(rec.x_true[j] + sys_x(j, rec.z) + te[j]);
      rec.y_star.push_back(y + sys_y(rec.z) + te[p]);
    }

    if (spec.design == Design::biomarker && rec.in_subset) {
      for (auto& u : u_err) u = bio.normal();
      const Vector be = mix_bio * u_err;
      rec.x_bio.resize(p);
      for (std::size_t j = 0; j < p; ++j) rec.x_bio[j] = rec.x_true[j] + be[j];
      rec.y_bio = y + be[p];
    }
  }
  return data;
}

}  // namespace errcal
