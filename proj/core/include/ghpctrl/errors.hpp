#pragma once

#include <stdexcept>
#include <string>

namespace ghpctrl {

/// Malformed inputs: dimension mismatches, bad topology, contract misuse.
class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-finite state, solver breakdown, non-convergence.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Config file problems: schema violations, unknown keys, bad values.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ghpctrl
