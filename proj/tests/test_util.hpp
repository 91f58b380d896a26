#pragma once

#include <optional>
#include <utility>

#include "errcal/error.hpp"

namespace test_util {

// Runs f and reports which structured diagnostic it raised, if any.
template <typename F>
std::optional<errcal::ErrorKind> kind_of(F&& f) {
  try {
    std::forward<F>(f)();
  } catch (const errcal::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace test_util
