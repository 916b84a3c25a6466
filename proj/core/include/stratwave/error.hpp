#pragma once

#include <stdexcept>
#include <string>

namespace stratwave {

// Bad input: malformed config, violated parameter ranges, inconsistent profile data.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical admissibility condition does not hold.
class ConditionError : public std::runtime_error {
 public:
  explicit ConditionError(const std::string& what) : std::runtime_error(what) {}
};

// Solver failure: divergence, integrator breakdown, lost bracket, ...
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Iterate left the elliptic regime: h_p + H' <= 0 somewhere.
class StateError : public NumericalError {
 public:
  explicit StateError(const std::string& what) : NumericalError(what) {}
};

}  // namespace stratwave
