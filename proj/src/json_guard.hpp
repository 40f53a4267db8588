#pragma once

#include <string>
#include <utility>

#include "pmuspoof/pmu_core.hpp"

#include <json.hpp>

namespace pmuspoof {

// Runs a JSON-reading block and turns library exceptions (missing key,
// wrong type) into DataError, so every malformed input surfaces as the
// same error type no matter which field tripped it.
template <typename F>
auto read_json(const char* what, F&& f) -> decltype(std::forward<F>(f)()) {
  try {
    return std::forward<F>(f)();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

}  // namespace pmuspoof
