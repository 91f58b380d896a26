#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errcal/error.hpp"
#include "errcal/matrix.hpp"
#include "errcal/records.hpp"
#include "errcal/rng.hpp"

namespace errcal {

struct BootstrapResult {
  Vector se;             // per-coefficient standard error, divisor b_ok − 1
  std::size_t b = 0;     // requested resamples
  std::size_t b_ok = 0;  // resamples that produced an estimate
  std::size_t n_failed = 0;
};

// How many redraws a single resample slot gets before it is recorded as a
// failure.
inline constexpr std::size_t kBootstrapRetryCap = 10;

// Nonparametric bootstrap stratified by subset membership: each resample
// draws the subset and non-subset records separately with replacement, so
// the subset size every estimator's identifiability rests on is preserved.
// Each slot consumes its own derived random stream, making the result
// independent of evaluation order. Resamples whose estimator reports a
// degenerate nuisance are redrawn up to the retry cap, then counted failed;
// more than 10% failures is an error.
template <typename Estimator>
BootstrapResult bootstrap(std::span<const SubjectRecord> data, Estimator&& estimator,
                          std::size_t b, std::uint64_t seed) {
  if (b < 2) fail(ErrorKind::InsufficientData, "bootstrap needs at least 2 resamples");
  std::vector<std::size_t> subset_idx, rest_idx;
  for (std::size_t i = 0; i < data.size(); ++i)
    (data[i].in_subset ? subset_idx : rest_idx).push_back(i);

  std::vector<Vector> estimates;
  estimates.reserve(b);
  std::size_t n_failed = 0;
  std::vector<SubjectRecord> resample;
  resample.reserve(data.size());
  for (std::size_t slot = 0; slot < b; ++slot) {
    Rng rng = Rng::stream(seed, {stream_tag::boot, slot});
    bool ok = false;
    for (std::size_t attempt = 0; attempt <= kBootstrapRetryCap && !ok; ++attempt) {
      resample.clear();
      for (std::size_t k = 0; k < subset_idx.size(); ++k)
        resample.push_back(data[subset_idx[rng.uniform_below(subset_idx.size())]]);
      for (std::size_t k = 0; k < rest_idx.size(); ++k)
        resample.push_back(data[rest_idx[rng.uniform_below(rest_idx.size())]]);
      try {
        estimates.push_back(estimator(std::span<const SubjectRecord>(resample)));
        ok = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateNuisance) throw;
      }
    }
    if (!ok) ++n_failed;
  }

  if (n_failed * 10 > b)
    fail(ErrorKind::UnstableBootstrap,
         std::to_string(n_failed) + " of " + std::to_string(b) +
             " resamples failed");
  if (estimates.size() < 2)
    fail(ErrorKind::UnstableBootstrap, "fewer than 2 usable resamples");

  const std::size_t dim = estimates.front().size();
  const double m = static_cast<double>(estimates.size());
  Vector mean(dim, 0.0);
  for (const auto& est : estimates)
    for (std::size_t c = 0; c < dim; ++c) mean[c] += est[c];
  for (auto& v : mean) v /= m;
  BootstrapResult out;
  out.b = b;
  out.b_ok = estimates.size();
  out.n_failed = n_failed;
  out.se.assign(dim, 0.0);
  for (const auto& est : estimates)
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = est[c] - mean[c];
      out.se[c] += d * d;
    }
  for (auto& v : out.se) v = std::sqrt(v / (m - 1.0));
  return out;
}

}  // namespace errcal
