#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "errcal/calibrate.hpp"
#include "errcal/generate.hpp"
#include "errcal/scenario.hpp"
#include "test_util.hpp"

using namespace errcal;
using Catch::Matchers::WithinAbs;
using test_util::kind_of;

namespace {

SubjectRecord pair_record(double x1, double x2, double y1, double y2) {
  SubjectRecord r;
  r.x_star = {x1, x2};
  r.y_star = {y1, y2};
  r.in_subset = true;
  return r;
}

SubjectRecord single_record(double x, double y) {
  SubjectRecord r;
  r.x_star = {x};
  r.y_star = {y};
  return r;
}

ScenarioSpec validation_simple(std::size_t cohort, std::size_t subset) {
  ScenarioSpec s = scenario_by_name("scenario1_bx1");
  s.name = "validation_simple";
  s.design = Design::validation;
  s.error.rho_TTtilde = 0.5;
  s.cohort_n = cohort;
  s.subset_n = subset;
  return s;
}

ScenarioSpec validation_ancova(std::size_t cohort, std::size_t subset) {
  ScenarioSpec s = scenario_by_name("scenario2");
  s.name = "validation_ancova";
  s.design = Design::validation;
  s.cohort_n = cohort;
  s.subset_n = subset;
  return s;
}

// A biomarker cohort at friendly scales: systematically biased main
// measurements, clean-error biomarker on the subset.
ScenarioSpec biomarker_moderate(std::size_t cohort, std::size_t subset) {
  ScenarioSpec s;
  s.name = "biomarker_moderate";
  s.design = Design::biomarker;
  s.model = {2.0, Vector{1.0}, Vector{-1.0}, 0.5};
  s.error.sigma_T = Matrix{{0.25}};
  s.error.sigma_Ttilde = 0.5;
  s.error.rho_TTtilde = 0.25;
  s.error.systematic_x = {Vector{0.3}, Matrix{{0.1}}};
  s.error.systematic_y = {0.1, Vector{-0.05}};
  s.error.bio_sigma_eta = Matrix{{0.09}};
  s.error.bio_sigma_nu = 0.2;
  s.mu_x = {0.0};
  s.sigma_x = Matrix{{1.0}};
  s.mu_z = {0.0};
  s.sigma_z = Matrix{{1.0}};
  s.rho_xz = Matrix{{0.3}};
  s.cohort_n = cohort;
  s.subset_n = subset;
  return s;
}

void zero_all_errors(ScenarioSpec& s) {
  auto& e = s.error;
  e.sigma_T = Matrix(e.sigma_T.rows(), e.sigma_T.cols());
  e.sigma_Ttilde = 0.0;
  e.rho_TTtilde = 0.0;
  for (auto& v : e.systematic_x.alpha0) v = 0.0;
  e.systematic_x.alpha1 =
      Matrix(e.systematic_x.alpha1.rows(), e.systematic_x.alpha1.cols());
  e.systematic_y.gamma0 = 0.0;
  for (auto& v : e.systematic_y.gamma1) v = 0.0;
  e.bio_sigma_eta = Matrix(e.bio_sigma_eta.rows(), e.bio_sigma_eta.cols());
  e.bio_sigma_nu = 0.0;
}

void require_beta_close(const Vector& a, const Vector& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE_THAT(a[i], WithinAbs(b[i], tol));
}

}  // namespace

TEST_CASE("half-difference moments match hand-computed values") {
  const std::vector<SubjectRecord> data = {pair_record(0.0, 2.0, 0.0, 1.0),
                                           pair_record(0.0, -2.0, 0.0, 0.0)};
  const NuisanceEstimates nu = nuisance_case1(data);
  // Replicate means are 1 and −1, so the pooled mean is 0 and the four
  // replicate rows are 0, 2, 0, −2 (divisor N+n = 4).
  REQUIRE(nu.mu_xstar[0] == 0.0);
  REQUIRE(nu.sigma_xstar(0, 0) == 2.0);
  // Half-difference products: (−2)²/2 = 2 and 2²/2 = 2, averaged 2;
  // cross products (−2)(−1)/2 = 1 and 2·0/2 = 0, averaged 0.5.
  REQUIRE(nu.sigma_T(0, 0) == 2.0);
  REQUIRE(nu.sigma_T_Ttilde[0] == 0.5);
  REQUIRE(nu.n_subset == 2);
}

TEST_CASE("identical replicates collapse the error moments to zero") {
  const std::vector<SubjectRecord> data = {
      pair_record(1.5, 1.5, 2.0, 1.0), pair_record(-0.25, -0.25, 0.0, 0.5),
      single_record(0.5, 1.0), single_record(-1.0, 0.25)};
  const NuisanceEstimates nu = nuisance_case1(data);
  REQUIRE(nu.sigma_T(0, 0) == 0.0);
  REQUIRE(nu.sigma_T_Ttilde[0] == 0.0);
  REQUIRE(nu.zero_covariate_error());

  // The fit degrades gracefully to least squares on the replicate means.
  OlsAccumulator ref(2);
  for (const auto& r : data) {
    const double k = static_cast<double>(r.replicates());
    double mx = 0.0, my = 0.0;
    for (std::size_t j = 0; j < r.replicates(); ++j) {
      mx += r.x_star[j];
      my += r.y_star[j];
    }
    const double row[2] = {1.0, mx / k};
    ref.add(row, my / k);
  }
  const Vector expect = ref.solve().beta;
  require_beta_close(calibrate_case1(data).beta, expect, 1e-14);
  require_beta_close(moment_correction(data, Design::reliability).beta, expect, 1e-10);
}

TEST_CASE("negative implied variance reports a degenerate nuisance") {
  const std::vector<SubjectRecord> data = {pair_record(3.0, -3.0, 1.0, 0.0),
                                           pair_record(1.0, -1.0, 0.0, 1.0)};
  // Pooled variance is 5 but the half-difference estimate is 10.
  REQUIRE(kind_of([&] { nuisance_case1(data); }) == ErrorKind::DegenerateNuisance);
  try {
    nuisance_case1(data);
    FAIL("expected a degenerate nuisance");
  } catch (const Error& e) {
    REQUIRE(std::string(e.what()).find("x component 1") != std::string::npos);
  }
  REQUIRE(kind_of([&] { calibrate_case1(data); }) == ErrorKind::DegenerateNuisance);
}

TEST_CASE("zero-error generation collapses every method onto the truth fit") {
  SECTION("replicate design") {
    ScenarioSpec s = scenario_by_name("scenario2");
    zero_all_errors(s);
    const auto data = generate(s, 11);
    const Vector truth = true_fit(data).beta;
    require_beta_close(calibrate_case1(data).beta, truth, 1e-10);
    require_beta_close(moment_correction(data, Design::reliability).beta, truth, 1e-10);
    require_beta_close(naive_fit(data).beta, truth, 1e-10);
  }
  SECTION("validation design") {
    ScenarioSpec s = validation_ancova(400, 100);
    zero_all_errors(s);
    const auto data = generate(s, 12);
    const Vector truth = true_fit(data).beta;
    require_beta_close(calibrate_case2(data).beta, truth, 1e-10);
    require_beta_close(moment_correction(data, Design::validation).beta, truth, 1e-10);
    require_beta_close(naive_fit(data).beta, truth, 1e-10);
  }
  SECTION("biomarker design") {
    ScenarioSpec s = biomarker_moderate(2000, 300);
    zero_all_errors(s);
    const auto data = generate(s, 13);
    const Vector truth = true_fit(data).beta;
    require_beta_close(calibrate_case3(data).beta, truth, 1e-10);
    require_beta_close(naive_fit(data).beta, truth, 1e-10);
  }
}

TEST_CASE("replicate-design fit matches an explicit reconstruction") {
  const ScenarioSpec s = scenario_by_name("scenario2");
  const auto data = generate(s, 7);
  const CalibrationFit fit = calibrate_case1(data);

  // Rebuild the calibrated rows from the moment blocks with independent
  // matrix algebra (explicit inverses instead of factored solves).
  const NuisanceEstimates nu = nuisance_case1(data);
  const double sx = nu.sigma_xstar(0, 0) - nu.sigma_T(0, 0);
  const Matrix minv = inverse_symmetric(
      Matrix{{nu.sigma_xstar(0, 0), nu.sigma_xstar_z(0, 0)},
             {nu.sigma_xstar_z(0, 0), nu.sigma_z(0, 0)}});
  const Matrix m3inv = inverse_symmetric(
      Matrix{{nu.sigma_xstar(0, 0), sx, nu.sigma_xstar_z(0, 0)},
             {sx, nu.sigma_xstar(0, 0), nu.sigma_xstar_z(0, 0)},
             {nu.sigma_xstar_z(0, 0), nu.sigma_xstar_z(0, 0), nu.sigma_z(0, 0)}});
  const auto dot2 = [](const Vector& a, double d0, double d1) {
    return a[0] * d0 + a[1] * d1;
  };
  const Vector wx = {sx * minv(0, 0) + nu.sigma_xstar_z(0, 0) * minv(1, 0),
                     sx * minv(0, 1) + nu.sigma_xstar_z(0, 0) * minv(1, 1)};
  const Vector wc = {nu.sigma_T_Ttilde[0] * minv(0, 0),
                     nu.sigma_T_Ttilde[0] * minv(0, 1)};
  Vector wxp(3), wc1(3), wc2(3);
  for (std::size_t c = 0; c < 3; ++c) {
    wxp[c] = sx * m3inv(0, c) + sx * m3inv(1, c) + nu.sigma_xstar_z(0, 0) * m3inv(2, c);
    wc1[c] = nu.sigma_T_Ttilde[0] * m3inv(0, c);
    wc2[c] = nu.sigma_T_Ttilde[0] * m3inv(1, c);
  }

  OlsAccumulator ref(3);
  std::size_t rows = 0;
  for (const auto& rec : data) {
    const double dz = rec.z[0] - nu.mu_z[0];
    if (rec.replicates() == 1) {
      const double dx = rec.x_star[0] - nu.mu_xstar[0];
      const double xhat = nu.mu_xstar[0] + dot2(wx, dx, dz);
      const double row[3] = {1.0, xhat, rec.z[0]};
      ref.add(row, rec.y_star[0] - dot2(wc, dx, dz));
      ++rows;
    } else {
      const double d1 = rec.x_star[0] - nu.mu_xstar[0];
      const double d2 = rec.x_star[1] - nu.mu_xstar[0];
      const double xhat =
          nu.mu_xstar[0] + wxp[0] * d1 + wxp[1] * d2 + wxp[2] * dz;
      const double row[3] = {1.0, xhat, rec.z[0]};
      ref.add(row, rec.y_star[0] - (wc1[0] * d1 + wc1[1] * d2 + wc1[2] * dz));
      ref.add(row, rec.y_star[1] - (wc2[0] * d1 + wc2[1] * d2 + wc2[2] * dz));
      rows += 2;
    }
  }
  REQUIRE(rows == s.cohort_n + s.subset_n);
  require_beta_close(fit.beta, ref.solve().beta, 1e-12);
  REQUIRE(fit.n_used == s.cohort_n);
  REQUIRE(fit.method == "rc_case1");
}

TEST_CASE("calibrated fits are consistent at large cohorts") {
  SECTION("replicate design recovers the outcome model") {
    ScenarioSpec s = scenario_by_name("scenario2");
    s.model.sigma_eps = 1.0;
    s.cohort_n = 40000;
    s.subset_n = 20000;
    const auto data = generate(s, 101);
    const Vector beta = calibrate_case1(data).beta;
    REQUIRE_THAT(beta[0], WithinAbs(2.0, 0.03));
    REQUIRE_THAT(beta[1], WithinAbs(1.0, 0.03));
    REQUIRE_THAT(beta[2], WithinAbs(-1.0, 0.03));
  }
  SECTION("validation design recovers the outcome model") {
    ScenarioSpec s = validation_ancova(40000, 4000);
    s.model.sigma_eps = 1.0;
    const auto data = generate(s, 102);
    const Vector beta = calibrate_case2(data).beta;
    REQUIRE_THAT(beta[0], WithinAbs(2.0, 0.03));
    REQUIRE_THAT(beta[1], WithinAbs(1.0, 0.03));
    REQUIRE_THAT(beta[2], WithinAbs(-1.0, 0.03));
  }
  SECTION("biomarker design removes systematic and correlated error") {
    const ScenarioSpec s = biomarker_moderate(20000, 2000);
    const auto data = generate(s, 103);
    const Vector beta = calibrate_case3(data).beta;
    REQUIRE_THAT(beta[0], WithinAbs(2.0, 0.05));
    REQUIRE_THAT(beta[1], WithinAbs(1.0, 0.05));
    REQUIRE_THAT(beta[2], WithinAbs(-1.0, 0.05));
    // The same data leave the uncorrected fit visibly biased.
    const Vector naive = naive_fit(data).beta;
    REQUIRE(std::abs(naive[1] - 1.0) > 0.1);
  }
  SECTION("uncorrected slope attenuates by the closed-form factor") {
    ScenarioSpec s = scenario_by_name("scenario1_bx1");
    s.cohort_n = 40000;
    s.subset_n = 20000;
    const auto data = generate(s, 104);
    REQUIRE_THAT(naive_fit(data).beta[1], WithinAbs(0.5, 0.03));
  }
}

TEST_CASE("validation moments estimate a biased outcome error") {
  ScenarioSpec s = validation_simple(10000, 5000);
  s.model.sigma_eps = 1.0;
  s.error.systematic_y.gamma0 = 0.5;
  const auto data = generate(s, 21);
  const CalibrationFit fit = calibrate_case2(data);
  REQUIRE_THAT(fit.nuisance.mu_Ttilde, WithinAbs(0.5, 0.05));
  // The mean offset must be absorbed by the error model, not the intercept.
  REQUIRE_THAT(fit.beta[0], WithinAbs(2.0, 0.07));
  REQUIRE_THAT(fit.beta[1], WithinAbs(1.0, 0.07));
}

TEST_CASE("calibrated and moment fits coincide on simple-regression data") {
  SECTION("replicate design, every subject paired") {
    ScenarioSpec s = scenario_by_name("scenario1_bx1");
    s.subset_n = s.cohort_n;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto data = generate(s, seed);
      const Vector rc = calibrate_case1(data).beta;
      const Vector mm = moment_correction(data, Design::reliability).beta;
      REQUIRE_THAT(rc[1], WithinAbs(mm[1], 1e-10));
      REQUIRE_THAT(rc[0], WithinAbs(mm[0], 1e-10));
    }
  }
  SECTION("validation design") {
    const ScenarioSpec s = validation_simple(400, 100);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto data = generate(s, seed);
      const Vector rc = calibrate_case2(data).beta;
      const Vector mm = moment_correction(data, Design::validation).beta;
      REQUIRE_THAT(rc[1], WithinAbs(mm[1], 1e-10));
      REQUIRE_THAT(rc[0], WithinAbs(mm[0], 1e-10));
    }
  }
}

TEST_CASE("moment correction rejects the biomarker design") {
  const auto data = generate(biomarker_moderate(200, 50), 3);
  REQUIRE(kind_of([&] { moment_correction(data, Design::biomarker); }) ==
          ErrorKind::InvalidScenario);
}

TEST_CASE("biomarker fit needs enough subset records for its regressions") {
  const auto data = generate(biomarker_moderate(50, 3), 5);
  REQUIRE(kind_of([&] { calibrate_case3(data); }) == ErrorKind::InsufficientData);
}

TEST_CASE("the oracle fit demands ground truth on every record") {
  auto data = generate(scenario_by_name("scenario1_bx1"), 9);
  REQUIRE(true_fit(data).method == "true");
  data[17].y_true.reset();
  REQUIRE(kind_of([&] { true_fit(data); }) == ErrorKind::InsufficientData);
}

TEST_CASE("power-of-two rescaling maps through every estimator exactly") {
  const auto rescale = [](std::vector<SubjectRecord> data) {
    for (auto& r : data) {
      for (auto& v : r.x_star) v *= 2.0;
      for (auto& v : r.x_true) v *= 2.0;
      for (auto& v : r.x_bio) v *= 2.0;
      for (auto& v : r.y_star) v *= 4.0;
      if (r.y_true) *r.y_true *= 4.0;
      if (r.y_bio) *r.y_bio *= 4.0;
    }
    return data;
  };
  // y ↦ 4y and x ↦ 2x turn (β₀, βx, βz) into (4β₀, 2βx, 4βz); binary scaling
  // commutes with IEEE rounding, so equality is exact.
  const auto check = [](const Vector& base, const Vector& scaled) {
    REQUIRE(scaled[0] == 4.0 * base[0]);
    REQUIRE(scaled[1] == 2.0 * base[1]);
    for (std::size_t c = 2; c < base.size(); ++c)
      REQUIRE(scaled[c] == 4.0 * base[c]);
  };
  SECTION("replicate design") {
    const auto data = generate(scenario_by_name("scenario2"), 5);
    const auto scaled = rescale(data);
    check(calibrate_case1(data).beta, calibrate_case1(scaled).beta);
    check(moment_correction(data, Design::reliability).beta,
          moment_correction(scaled, Design::reliability).beta);
    check(naive_fit(data).beta, naive_fit(scaled).beta);
    check(true_fit(data).beta, true_fit(scaled).beta);
  }
  SECTION("validation design") {
    const auto data = generate(validation_ancova(400, 100), 6);
    const auto scaled = rescale(data);
    check(calibrate_case2(data).beta, calibrate_case2(scaled).beta);
    check(moment_correction(data, Design::validation).beta,
          moment_correction(scaled, Design::validation).beta);
  }
  SECTION("biomarker design") {
    const auto data = generate(biomarker_moderate(2000, 300), 8);
    const auto scaled = rescale(data);
    check(calibrate_case3(data).beta, calibrate_case3(scaled).beta);
  }
}
