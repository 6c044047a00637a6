#pragma once

#include <stdexcept>
#include <string>

namespace logitcal {

// Error categories map one-to-one onto the CLI exit codes.
enum class ExitCode : int {
  ok = 0,
  config = 2,
  data = 3,
  degenerate = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

// Bad flags, bad config keys, out-of-range counts.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

// Unreadable or malformed input data.
class DataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::data; }
};

// Input is well-formed but the requested computation is undefined on it,
// e.g. a supervised calibration on single-class data.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::degenerate; }
};

}  // namespace logitcal
