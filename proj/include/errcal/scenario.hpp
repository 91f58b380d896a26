#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "errcal/error.hpp"
#include "errcal/matrix.hpp"
#include "errcal/records.hpp"

namespace errcal {

// Distribution family of the replicate measurement errors. Non-Gaussian
// shapes are standardized to mean 0, variance 1 before scaling, so the
// second-moment structure of a scenario is shape-invariant.
enum class ErrorShape { gaussian, normal_mixture, log_normal };

inline std::string_view to_string(ErrorShape s) {
  switch (s) {
    case ErrorShape::gaussian: return "gaussian";
    case ErrorShape::normal_mixture: return "normal_mixture";
    case ErrorShape::log_normal: return "log_normal";
  }
  return "unknown";
}

inline ErrorShape parse_error_shape(std::string_view s) {
  if (s == "gaussian") return ErrorShape::gaussian;
  if (s == "normal_mixture") return ErrorShape::normal_mixture;
  if (s == "log_normal") return ErrorShape::log_normal;
  fail(ErrorKind::InvalidScenario, "unknown error_shape '" + std::string(s) + "'");
}

// Outcome model: y = beta0 + beta_x·x + beta_z·z + N(0, sigma_eps²).
struct ModelSpec {
  double beta0 = 0.0;
  Vector beta_x;
  Vector beta_z;
  double sigma_eps = 0.0;
};

// Linear-in-z systematic bias added to a mismeasured quantity.
struct SystematicX {
  Vector alpha0;  // p
  Matrix alpha1;  // p×q
};
struct SystematicY {
  double gamma0 = 0.0;
  Vector gamma1;  // q
};

// Measurement-error model.
//   sigma_T       p×p covariance of the covariate replicate error
//   sigma_Ttilde  standard deviation of the outcome replicate error
//   rho_TTtilde   per-component correlation between the two errors
//   systematic_*  linear bias terms (biomarker design only)
//   bio_sigma_eta p×p covariance of the biomarker covariate error
//   bio_sigma_nu  standard deviation of the biomarker outcome error
struct ErrorSpec {
  Matrix sigma_T;
  double sigma_Ttilde = 0.0;
  double rho_TTtilde = 0.0;
  SystematicX systematic_x;
  SystematicY systematic_y;
  Matrix bio_sigma_eta;
  double bio_sigma_nu = 0.0;
  ErrorShape error_shape = ErrorShape::gaussian;
};

// Complete generator specification for one simulated cohort.
struct ScenarioSpec {
  std::string name;
  ModelSpec model;
  ErrorSpec error;
  Vector mu_x;      // p
  Matrix sigma_x;   // p×p covariance
  Vector mu_z;      // q
  Matrix sigma_z;   // q×q covariance
  Matrix rho_xz;    // p×q cross-correlation block
  std::size_t cohort_n = 0;
  std::size_t subset_n = 0;
  Design design = Design::reliability;

  std::size_t p() const { return mu_x.size(); }
  std::size_t q() const { return mu_z.size(); }
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) fail(ErrorKind::InvalidScenario, message);
}

}  // namespace detail

// Joint covariance of (X, Z), with the cross block rebuilt from the
// correlation entries and the marginal standard deviations.
inline Matrix joint_xz_cov(const ScenarioSpec& s) {
  const std::size_t p = s.p(), q = s.q();
  Matrix cov(p + q, p + q);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) cov(i, j) = s.sigma_x(i, j);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) cov(p + i, p + j) = s.sigma_z(i, j);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) {
      const double c =
          s.rho_xz(i, j) * std::sqrt(s.sigma_x(i, i)) * std::sqrt(s.sigma_z(j, j));
      cov(i, p + j) = c;
      cov(p + j, i) = c;
    }
  return cov;
}

// Joint covariance of the replicate error pair (T, T̃): T is p-dimensional,
// T̃ scalar, correlated per component through rho_TTtilde.
inline Matrix joint_error_cov(const ScenarioSpec& s) {
  const std::size_t p = s.p();
  Matrix cov(p + 1, p + 1);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) cov(i, j) = s.error.sigma_T(i, j);
  cov(p, p) = s.error.sigma_Ttilde * s.error.sigma_Ttilde;
  for (std::size_t i = 0; i < p; ++i) {
    const double c =
        s.error.rho_TTtilde * std::sqrt(s.error.sigma_T(i, i)) * s.error.sigma_Ttilde;
    cov(i, p) = c;
    cov(p, i) = c;
  }
  return cov;
}

inline Matrix joint_bio_cov(const ScenarioSpec& s) {
  const std::size_t p = s.p();
  Matrix cov(p + 1, p + 1);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) cov(i, j) = s.error.bio_sigma_eta(i, j);
  cov(p, p) = s.error.bio_sigma_nu * s.error.bio_sigma_nu;
  return cov;
}

inline void validate(const ScenarioSpec& s) {
  using detail::require;
  const std::size_t p = s.p(), q = s.q();
  require(p >= 1, "at least one error-prone covariate is required");
  require(s.model.beta_x.size() == p, "beta_x length must match mu_x");
  require(s.model.beta_z.size() == q, "beta_z length must match mu_z");
  require(s.model.sigma_eps >= 0.0, "sigma_eps must be nonnegative");
  require(s.sigma_x.rows() == p && s.sigma_x.cols() == p, "sigma_x must be p×p");
  require(s.sigma_z.rows() == q && s.sigma_z.cols() == q, "sigma_z must be q×q");
  require(s.rho_xz.rows() == p && s.rho_xz.cols() == q, "rho_xz must be p×q");
  require(s.error.sigma_T.rows() == p && s.error.sigma_T.cols() == p,
          "sigma_T must be p×p");
  require(s.error.sigma_Ttilde >= 0.0, "sigma_Ttilde must be nonnegative");
  require(std::abs(s.error.rho_TTtilde) <= 1.0, "rho_TTtilde must lie in [-1,1]");
  require(s.error.bio_sigma_nu >= 0.0, "bio_sigma_nu must be nonnegative");
  require(s.cohort_n >= 2, "cohort_n must be at least 2");
  require(s.subset_n >= 2 && s.subset_n <= s.cohort_n,
          "subset_n must lie in [2, cohort_n]");
  if (s.design == Design::biomarker) {
    require(s.error.systematic_x.alpha0.size() == p, "alpha0 length must match p");
    require(s.error.systematic_x.alpha1.rows() == p &&
                s.error.systematic_x.alpha1.cols() == q,
            "alpha1 must be p×q");
    require(s.error.systematic_y.gamma1.size() == q, "gamma1 length must match q");
    require(s.error.bio_sigma_eta.rows() == p && s.error.bio_sigma_eta.cols() == p,
            "bio_sigma_eta must be p×p");
  } else {
    // Outside the biomarker design the estimators identify the error moments
    // only for bias-free covariate measurements: no systematic slopes, no
    // covariate offset. A constant outcome offset is estimable from exact
    // validation outcomes (the validation stack carries a mean term), but not
    // from replicate pairs, whose differences cancel any common shift.
    for (double a : s.error.systematic_x.alpha0)
      require(a == 0.0, "covariate offsets are only supported in the biomarker design");
    for (std::size_t j = 0; j < s.error.systematic_x.alpha1.rows() *
                                    s.error.systematic_x.alpha1.cols();
         ++j)
      require(s.error.systematic_x.alpha1.data()[j] == 0.0,
              "systematic slopes are only supported in the biomarker design");
    for (double g : s.error.systematic_y.gamma1)
      require(g == 0.0, "systematic slopes are only supported in the biomarker design");
    if (s.design == Design::reliability)
      require(s.error.systematic_y.gamma0 == 0.0,
              "outcome offsets require validation or biomarker data");
  }
  // PSD checks: a failed factorization is an invalid scenario.
  psd_mixing(joint_xz_cov(s), "joint (X,Z) covariance", ErrorKind::InvalidScenario);
  psd_mixing(joint_error_cov(s), "replicate error covariance", ErrorKind::InvalidScenario);
  if (s.design == Design::biomarker)
    psd_mixing(joint_bio_cov(s), "biomarker error covariance", ErrorKind::InvalidScenario);
}

namespace detail {

// Simple-regression cohort with replicate pairs on the subset:
// y = 2 + beta_x·x + N(0,5²), x ~ N(0,1), unit error variances.
inline ScenarioSpec simple_replicate_scenario(std::string name, double beta_x,
                                              std::size_t subset_n) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.design = Design::reliability;
  s.model = {2.0, Vector{beta_x}, Vector{}, 5.0};
  s.error.sigma_T = Matrix{{1.0}};
  s.error.sigma_Ttilde = 1.0;
  s.error.rho_TTtilde = 0.0;
  s.mu_x = {0.0};
  s.sigma_x = Matrix{{1.0}};
  s.mu_z = {};
  s.sigma_z = Matrix(0, 0);
  s.rho_xz = Matrix(1, 0);
  s.cohort_n = 400;
  s.subset_n = subset_n;
  return s;
}

// Two-covariate cohort with one exact covariate:
// y = 2 + x − z + N(0,5²), (x,z) standard normal with correlation 0.5,
// correlated replicate errors.
inline ScenarioSpec ancova_replicate_scenario(std::string name, ErrorShape shape) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.design = Design::reliability;
  s.model = {2.0, Vector{1.0}, Vector{-1.0}, 5.0};
  s.error.sigma_T = Matrix{{1.0}};
  s.error.sigma_Ttilde = 1.0;
  s.error.rho_TTtilde = 0.25;
  s.error.error_shape = shape;
  s.mu_x = {0.0};
  s.sigma_x = Matrix{{1.0}};
  s.mu_z = {0.0};
  s.sigma_z = Matrix{{1.0}};
  s.rho_xz = Matrix{{0.5}};
  s.cohort_n = 400;
  s.subset_n = 200;
  return s;
}

}  // namespace detail

// Dietary-energy cohort: a large observational study with systematically
// biased self-reported intake and an unbiased biomarker on a small subset.
inline ScenarioSpec whi_scenario() {
  ScenarioSpec s;
  s.name = "whi";
  s.design = Design::biomarker;
  s.model = {7.76, Vector{-0.192}, Vector{0.013}, 0.101};
  s.error.sigma_T = Matrix{{0.112 * 0.112}};
  s.error.sigma_Ttilde = 0.3;
  s.error.rho_TTtilde = -0.12;
  s.error.systematic_x = {Vector{0.207}, Matrix{{0.0036}}};
  s.error.systematic_y = {0.0054, Vector{-0.0113}};
  s.error.bio_sigma_eta = Matrix{{0.186 * 0.186}};
  s.error.bio_sigma_nu = 0.084;
  s.mu_x = {2.647};
  s.sigma_x = Matrix{{0.199 * 0.199}};
  s.mu_z = {28.228};
  s.sigma_z = Matrix{{5.547 * 5.547}};
  s.rho_xz = Matrix{{0.0043}};
  s.cohort_n = 29000;
  s.subset_n = 540;
  return s;
}

// Built-in scenarios. The N=1000 cohort variants reported alongside these
// designs are reachable by overriding cohort_n; the bundled defaults use the
// N=400 cohort.
inline const std::vector<ScenarioSpec>& scenario_registry() {
  static const std::vector<ScenarioSpec> registry = [] {
    std::vector<ScenarioSpec> r;
    r.push_back(detail::simple_replicate_scenario("scenario1_bx1", 1.0, 100));
    r.push_back(detail::simple_replicate_scenario("scenario1_bx5", 5.0, 100));
    r.push_back(detail::ancova_replicate_scenario("scenario2", ErrorShape::gaussian));
    r.push_back(detail::ancova_replicate_scenario("scenario3_mixture",
                                                  ErrorShape::normal_mixture));
    r.push_back(detail::ancova_replicate_scenario("scenario3_lognormal",
                                                  ErrorShape::log_normal));
    r.push_back(whi_scenario());
    for (const auto& s : r) validate(s);
    return r;
  }();
  return registry;
}

inline std::vector<std::string> scenario_names() {
  std::vector<std::string> names;
  for (const auto& s : scenario_registry()) names.push_back(s.name);
  return names;
}

inline ScenarioSpec scenario_by_name(std::string_view name) {
  for (const auto& s : scenario_registry())
    if (s.name == name) return s;
  std::string known;
  for (const auto& s : scenario_registry()) {
    if (!known.empty()) known += ", ";
    known += s.name;
  }
  fail(ErrorKind::InvalidScenario,
       "unknown scenario '" + std::string(name) + "' (known: " + known + ")");
}

}  // namespace errcal
