#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errcal/error.hpp"
#include "errcal/matrix.hpp"

namespace errcal {

// Study designs determining which auxiliary observations exist on the subset:
//   reliability — subset members carry a second replicate of (X*, Y*);
//   validation  — subset members carry the exact (X, Y);
//   biomarker   — subset members carry unbiased biomarker versions of (X, Y).
enum class Design { reliability, validation, biomarker };

inline std::string_view to_string(Design d) {
  switch (d) {
    case Design::reliability: return "reliability";
    case Design::validation: return "validation";
    case Design::biomarker: return "biomarker";
  }
  return "unknown";
}

inline Design parse_design(std::string_view s) {
  if (s == "reliability") return Design::reliability;
  if (s == "validation") return Design::validation;
  if (s == "biomarker") return Design::biomarker;
  fail(ErrorKind::InvalidScenario, "unknown design '" + std::string(s) + "'");
}

// One study subject. x_star holds the replicate measurements back to back
// (replicate-major: k·p values); y_star holds the k replicate outcomes.
// x_true/y_true are simulation ground truth: generators populate them on
// every record so benchmark fits can use them, but estimators may only read
// them on in_subset records (validation design) — off-subset truth is never
// observable in a real study.
struct SubjectRecord {
  std::vector<double> x_star;
  Vector y_star;
  Vector z;
  Vector x_true;
  std::optional<double> y_true;
  Vector x_bio;
  std::optional<double> y_bio;
  bool in_subset = false;

  std::size_t replicates() const { return y_star.size(); }

  std::span<const double> x_replicate(std::size_t j, std::size_t p) const {
    return {x_star.data() + j * p, p};
  }
};

struct DataDims {
  std::size_t p = 0;        // covariates measured with error
  std::size_t q = 0;        // exactly measured covariates
  std::size_t n_records = 0;
  std::size_t n_subset = 0;
};

// Validates structural consistency of a data set and reports its dimensions.
inline DataDims check_dims(std::span<const SubjectRecord> data) {
  if (data.size() < 2) fail(ErrorKind::InsufficientData, "need at least 2 records");
  DataDims dims;
  dims.n_records = data.size();
  const std::size_t k0 = data.front().replicates();
  if (k0 == 0 || data.front().x_star.size() % k0 != 0)
    fail(ErrorKind::LayoutError, "record 0 has inconsistent replicate layout");
  dims.p = data.front().x_star.size() / k0;
  dims.q = data.front().z.size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data[i];
    const std::size_t k = r.replicates();
    if (k < 1 || k > 2)
      fail(ErrorKind::LayoutError, "record " + std::to_string(i) + " has replicate count outside {1,2}");
    if (k == 2 && !r.in_subset)
      fail(ErrorKind::LayoutError, "record " + std::to_string(i) + " replicated outside the subset");
    if (r.x_star.size() != k * dims.p || r.z.size() != dims.q)
      fail(ErrorKind::LayoutError, "record " + std::to_string(i) + " has mismatched dimensions");
    if (r.in_subset) ++dims.n_subset;
  }
  return dims;
}

}  // namespace errcal
