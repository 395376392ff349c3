#pragma once

#include <stdexcept>
#include <string>

namespace modeflow {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kConfigError = 2,
  kNumericalError = 3,
  kFormatError = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kIoError; }
};

/// Invalid parameters, shape mismatches, or violated preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfigError; }
};

/// Solver failure, divergence, or degenerate data.
class NumericalError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kNumericalError; }
};

/// Malformed input file (bad magic, truncated payload, inconsistent shape).
class FormatError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kFormatError; }
};

}  // namespace modeflow
