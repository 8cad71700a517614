#pragma once

#include <stdexcept>
#include <string>

namespace nvrotor {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad or missing configuration input (CLI exit code 2).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Computation left its domain of validity (CLI exit code 3):
/// anti-crossing floor, unstable mode, pole/caustic, no root in bracket.
struct ComputeError : Error {
  explicit ComputeError(const std::string& msg) : Error(msg) {}
};

/// An iterative scheme exhausted its budget (CLI exit code 4).
struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

} // namespace nvrotor
