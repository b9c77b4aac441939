#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace mvjl {

/// Bad dimensions, hyperparameters or schedule.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Distribution parameters outside their support.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A parameter state that violates the model's support (e.g. sigma^2 <= 0).
class InvalidStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization failures. `min_eigenvalue` is NaN when no estimate was made.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double min_eigenvalue = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class UnsupportedFeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientSamplesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file or directory that cannot be created, opened or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParseErrorKind {
  kMalformed,
  kMissingCell,
  kNodeOutOfRange,
  kSelfLoop,
  kNonFinite,
  kDuplicateRow,
  kUnknownSubject,
  kDimensionMismatch,
};

const char* to_string(ParseErrorKind kind) noexcept;

/// Reader failure. `line` is 1-based within `file`; 0 when the error is not
/// tied to a single line (e.g. a missing cell).
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::string file, std::size_t line, const std::string& detail);

  ParseErrorKind kind() const noexcept { return kind_; }
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ParseErrorKind kind_;
  std::string file_;
  std::size_t line_;
};

}  // namespace mvjl
