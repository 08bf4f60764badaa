#pragma once

#include <stdexcept>
#include <string>

namespace framecast {

/// Thrown when a computation produces or receives a non-finite value
/// (training aborts propagate this after dumping diagnostics).
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace framecast
