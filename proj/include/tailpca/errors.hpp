#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tailpca {

/// Root of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI when it reports failures.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Invalid parameters or specifications supplied by the caller.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error("config_error", message) {}

 protected:
  ConfigError(std::string kind, const std::string& message)
      : Error(std::move(kind), message) {}
};

/// Invalid synthetic-market specification.
class SpecError : public ConfigError {
 public:
  explicit SpecError(const std::string& message)
      : ConfigError("spec_error", message) {}
};

/// Input data that cannot be analysed.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& message)
      : DataError("parse_error",
                  "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  /// 1-based line number in the offending stream (the header is line 1).
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateKeyError : public DataError {
 public:
  DuplicateKeyError(std::size_t line, const std::string& message)
      : DataError("duplicate_key",
                  "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ReferenceError : public DataError {
 public:
  explicit ReferenceError(const std::string& message)
      : DataError("reference_error", message) {}
};

class EmptyUniverseError : public DataError {
 public:
  explicit EmptyUniverseError(const std::string& message)
      : DataError("empty_universe", message) {}
};

class InsufficientHistoryError : public DataError {
 public:
  explicit InsufficientHistoryError(const std::string& message)
      : DataError("insufficient_history", message) {}
};

class DegenerateSeriesError : public DataError {
 public:
  DegenerateSeriesError(std::string ticker, const std::string& message)
      : DataError("degenerate_series", message), ticker_(std::move(ticker)) {}

  const std::string& ticker() const noexcept { return ticker_; }

 private:
  std::string ticker_;
};

class ConvergenceError : public DataError {
 public:
  ConvergenceError(double residual, const std::string& message)
      : DataError("convergence_error", message), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace tailpca
