#pragma once

#include <stdexcept>
#include <string>

namespace ccmap {

// Three error families, matching the CLI exit codes (2, 3, 4).

/// Bad configuration: invalid flags, budgets, hyperparameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or unsupported data: parse failures, ragged rows, widths above a capacity limit.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure, e.g. a non-finite loss during training.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::string state_json = "{}")
      : std::runtime_error(what), state_json_(std::move(state_json)) {}

  /// Diagnostic dump of the state at the time of failure (JSON text).
  const std::string& state_json() const noexcept { return state_json_; }

 private:
  std::string state_json_;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class CapacityError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace ccmap
