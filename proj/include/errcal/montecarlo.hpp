#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "errcal/bootstrap.hpp"
#include "errcal/calibrate.hpp"
#include "errcal/error.hpp"
#include "errcal/generate.hpp"
#include "errcal/rng.hpp"
#include "errcal/sandwich.hpp"
#include "errcal/scenario.hpp"

namespace errcal {

// Variance estimator attached to the calibrated methods. The benchmark
// methods (true, naive) always carry their classical least-squares variance;
// the moment-correction methods have no estimating-equation stack, so they
// report standard errors only under the bootstrap.
struct VarianceSpec {
  enum class Kind { sandwich, bootstrap };
  Kind kind = Kind::sandwich;
  std::size_t b = 200;  // bootstrap resamples
};

struct RunSpec {
  ScenarioSpec scenario;
  std::vector<std::string> methods;
  std::size_t replicates = 0;
  std::uint64_t base_seed = 0;
  VarianceSpec variance;
  std::vector<std::size_t> subset_sizes;  // empty → the scenario's own subset_n
  std::size_t threads = 1;                // 0 → hardware concurrency
};

// Table metrics for one method at one subset size, per coefficient.
struct MethodSummary {
  std::string method;
  Vector pct_bias;  // 100·(mean β̂ − β)/|β|
  Vector se;        // empirical SD of β̂, divisor R_ok − 1
  Vector ase;       // mean of the per-replicate estimated SE
  Vector mse;       // mean of (β̂ − β)², divisor R_ok
  Vector cp;        // fraction of β̂ ± 1.96·SE intervals covering β
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

struct MonteCarloSummary {
  std::string scenario;
  std::size_t n_subset = 0;
  std::size_t replicates = 0;
  std::vector<std::string> coef_names;
  std::vector<MethodSummary> methods;
};

// Monte Carlo error bands used by the acceptance checks: a binomial band for
// coverage and a normal mean band (in percent of |β|) for the bias.
struct McTolerance {
  double cp = 0.0;
  double pct_bias = 0.0;
};

inline McTolerance mc_tolerance(double empirical_se, double beta_true,
                                std::size_t replicates) {
  if (replicates < 100)
    fail(ErrorKind::InvalidScenario, "tolerance bands assume at least 100 replicates");
  const double r = static_cast<double>(replicates);
  McTolerance t;
  t.cp = 1.96 * std::sqrt(0.95 * 0.05 / r);
  t.pct_bias = 1.96 * (empirical_se / std::sqrt(r)) / std::abs(beta_true) * 100.0;
  return t;
}

inline const std::vector<std::string>& method_tags(Design design) {
  static const std::vector<std::string> reliability = {"true", "naive", "rc_case1",
                                                       "mm_case1"};
  static const std::vector<std::string> validation = {"true", "naive", "rc_case2",
                                                      "mm_case2"};
  static const std::vector<std::string> biomarker = {"true", "naive", "rc_case3"};
  switch (design) {
    case Design::reliability: return reliability;
    case Design::validation: return validation;
    case Design::biomarker: return biomarker;
  }
  fail(ErrorKind::InvalidScenario, "unhandled design");
}

inline bool method_valid(std::string_view tag, Design design) {
  for (const auto& t : method_tags(design))
    if (t == tag) return true;
  return false;
}

namespace detail {

struct FitOutcome {
  bool ok = false;
  Vector beta;
  Vector se;  // empty when the variance method does not apply
};

inline CalibrationFit fit_by_tag(std::string_view tag, Design design,
                                 std::span<const SubjectRecord> data) {
  if (tag == "true") return true_fit(data);
  if (tag == "naive") return naive_fit(data);
  if (tag == "rc_case1" || tag == "rc_case2" || tag == "rc_case3")
    return rc_fit(data, design);
  if (tag == "mm_case1" || tag == "mm_case2") return moment_correction(data, design);
  fail(ErrorKind::InvalidScenario, "unknown method tag '" + std::string(tag) + "'");
}

inline FitOutcome fit_with_variance(std::string_view tag, Design design,
                                    std::span<const SubjectRecord> data,
                                    const VarianceSpec& variance,
                                    std::uint64_t rep_seed) {
  FitOutcome out;
  CalibrationFit fit = fit_by_tag(tag, design, data);
  out.beta = fit.beta;
  const bool calibrated = tag.substr(0, 3) == "rc_";
  const bool moments = tag.substr(0, 3) == "mm_";
  if (fit.vcov) {  // benchmark fits carry the classical variance
    out.se.resize(fit.beta.size());
    for (std::size_t c = 0; c < fit.beta.size(); ++c)
      out.se[c] = std::sqrt((*fit.vcov)(c, c));
  } else if (variance.kind == VarianceSpec::Kind::bootstrap) {
    const auto estimator = [tag, design](std::span<const SubjectRecord> d) {
      return fit_by_tag(tag, design, d).beta;
    };
    out.se = bootstrap(data, estimator, variance.b, rep_seed).se;
  } else if (calibrated) {
    const SandwichResult sw = sandwich(design, data, fit);
    out.se.resize(fit.beta.size());
    for (std::size_t c = 0; c < fit.beta.size(); ++c)
      out.se[c] = std::sqrt(sw.beta_vcov(c, c));
  } else if (moments) {
    // no estimating-equation stack: point estimate only under the sandwich
  }
  out.ok = true;
  return out;
}

inline Vector true_beta(const ScenarioSpec& s) {
  Vector beta;
  beta.push_back(s.model.beta0);
  for (double v : s.model.beta_x) beta.push_back(v);
  for (double v : s.model.beta_z) beta.push_back(v);
  return beta;
}

}  // namespace detail

// Coefficient labels in estimation order: intercept, error-prone covariates,
// exact covariates.
inline std::vector<std::string> coef_names(std::size_t p, std::size_t q) {
  std::vector<std::string> names = {"beta0"};
  for (std::size_t a = 0; a < p; ++a) names.push_back("beta_x" + std::to_string(a + 1));
  for (std::size_t b = 0; b < q; ++b) names.push_back("beta_z" + std::to_string(b + 1));
  return names;
}

// Numeric formatting shared by every text output (%.10g; nan for
// not-applicable cells) so identical configurations emit identical bytes.
inline std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Runs the replicated simulation: generate → fit every requested method →
// summarize, once per subset size. Replicate r draws its data and bootstrap
// resamples from the stream derived as (base_seed, r), so summaries are
// independent of thread count and execution order.
inline std::vector<MonteCarloSummary> run(const RunSpec& spec) {
  if (spec.replicates < 1)
    fail(ErrorKind::InvalidScenario, "a run needs at least 1 replicate");
  if (spec.methods.empty())
    fail(ErrorKind::InvalidScenario, "a run needs at least one method");
  const Design design = spec.scenario.design;
  for (const auto& tag : spec.methods)
    if (!method_valid(tag, design)) {
      std::string valid;
      for (const auto& t : method_tags(design)) {
        if (!valid.empty()) valid += ", ";
        valid += t;
      }
      fail(ErrorKind::InvalidScenario, "method '" + tag + "' is not available for the " +
                                           std::string(to_string(design)) +
                                           " design (valid: " + valid + ")");
    }

  std::vector<std::size_t> sizes = spec.subset_sizes;
  if (sizes.empty()) sizes.push_back(spec.scenario.subset_n);
  std::size_t n_threads = spec.threads;
  if (n_threads == 0) {
    n_threads = std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
  }

  const Vector beta_true = detail::true_beta(spec.scenario);
  const std::size_t n_coef = beta_true.size();
  const std::size_t n_methods = spec.methods.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<MonteCarloSummary> out;
  for (const std::size_t subset_n : sizes) {
    ScenarioSpec scenario = spec.scenario;
    scenario.subset_n = subset_n;
    validate(scenario);

    // Indexed result slots keep the reduction deterministic.
    std::vector<std::vector<detail::FitOutcome>> results(
        spec.replicates, std::vector<detail::FitOutcome>(n_methods));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t r = next.fetch_add(1); r < spec.replicates;
           r = next.fetch_add(1)) {
        const std::uint64_t rep_seed = Rng::derive(spec.base_seed, {r});
        std::vector<SubjectRecord> data;
        try {
          data = generate(scenario, rep_seed);
        } catch (const Error&) {
          continue;  // every method of this replicate stays failed
        }
        for (std::size_t m = 0; m < n_methods; ++m) {
          try {
            results[r][m] = detail::fit_with_variance(spec.methods[m], design, data,
                                                      spec.variance, rep_seed);
          } catch (const Error&) {
            // recorded as a failure for this method only
          }
        }
      }
    };
    if (n_threads <= 1 || spec.replicates <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      const std::size_t k = std::min(n_threads, spec.replicates);
      pool.reserve(k);
      for (std::size_t t = 0; t < k; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }

    MonteCarloSummary summary;
    summary.scenario = spec.scenario.name;
    summary.n_subset = subset_n;
    summary.replicates = spec.replicates;
    summary.coef_names = coef_names(spec.scenario.p(), spec.scenario.q());
    bool any_ok = false;
    for (std::size_t m = 0; m < n_methods; ++m) {
      MethodSummary ms;
      ms.method = spec.methods[m];
      ms.pct_bias.assign(n_coef, nan);
      ms.se.assign(n_coef, nan);
      ms.ase.assign(n_coef, nan);
      ms.mse.assign(n_coef, nan);
      ms.cp.assign(n_coef, nan);
      std::vector<const detail::FitOutcome*> ok;
      for (std::size_t r = 0; r < spec.replicates; ++r)
        if (results[r][m].ok) ok.push_back(&results[r][m]);
      ms.n_ok = ok.size();
      ms.n_failed = spec.replicates - ok.size();
      if (!ok.empty()) {
        any_ok = true;
        const double n_ok = static_cast<double>(ok.size());
        const bool with_se = !ok.front()->se.empty();
        for (std::size_t c = 0; c < n_coef; ++c) {
          double mean = 0.0, mse = 0.0;
          for (const auto* f : ok) {
            mean += f->beta[c];
            const double d = f->beta[c] - beta_true[c];
            mse += d * d;
          }
          mean /= n_ok;
          ms.mse[c] = mse / n_ok;
          ms.pct_bias[c] = beta_true[c] == 0.0
                               ? nan
                               : 100.0 * (mean - beta_true[c]) / std::abs(beta_true[c]);
          if (ok.size() >= 2) {
            double ss = 0.0;
            for (const auto* f : ok) {
              const double d = f->beta[c] - mean;
              ss += d * d;
            }
            ms.se[c] = std::sqrt(ss / (n_ok - 1.0));
          }
          if (with_se) {
            double ase = 0.0, covered = 0.0;
            for (const auto* f : ok) {
              ase += f->se[c];
              if (std::abs(f->beta[c] - beta_true[c]) <= 1.96 * f->se[c])
                covered += 1.0;
            }
            ms.ase[c] = ase / n_ok;
            ms.cp[c] = covered / n_ok;
          }
        }
      }
      summary.methods.push_back(std::move(ms));
    }
    if (!any_ok)
      fail(ErrorKind::AllReplicatesFailed,
           "no replicate produced an estimate for scenario '" + summary.scenario +
               "' at subset size " + std::to_string(subset_n));
    out.push_back(std::move(summary));
  }
  return out;
}

// One row per (scenario, subset size, method, coefficient); fixed column
// order. Metrics that do not apply (moment methods under the sandwich, or a
// method with no successful replicate) print as nan.
inline void write_csv(std::ostream& os, std::span<const MonteCarloSummary> summaries) {
  os << "scenario,n_subset,method,coef,pct_bias,se,ase,mse,cp,n_failed\n";
  for (const auto& s : summaries)
    for (const auto& m : s.methods)
      for (std::size_t c = 0; c < s.coef_names.size(); ++c) {
        os << s.scenario << ',' << s.n_subset << ',' << m.method << ','
           << s.coef_names[c] << ',' << format_metric(m.pct_bias[c]) << ','
           << format_metric(m.se[c]) << ',' << format_metric(m.ase[c]) << ','
           << format_metric(m.mse[c]) << ',' << format_metric(m.cp[c]) << ','
           << m.n_failed << '\n';
      }
}

}  // namespace errcal
