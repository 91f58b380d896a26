#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace errcal {

// Structured diagnostic categories. Every failure surfaced by the library is
// one of these, so callers (and the CLI) can report a stable name instead of
// a bare message.
enum class ErrorKind {
  InsufficientData,
  NotSymmetric,
  NearSingular,
  RankDeficient,
  InvalidScenario,
  DegenerateNuisance,
  LayoutError,
  PsiNotRoot,
  UnstableBootstrap,
  AllReplicatesFailed,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NearSingular: return "NearSingular";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::InvalidScenario: return "InvalidScenario";
    case ErrorKind::DegenerateNuisance: return "DegenerateNuisance";
    case ErrorKind::LayoutError: return "LayoutError";
    case ErrorKind::PsiNotRoot: return "PsiNotRoot";
    case ErrorKind::UnstableBootstrap: return "UnstableBootstrap";
    case ErrorKind::AllReplicatesFailed: return "AllReplicatesFailed";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace errcal
