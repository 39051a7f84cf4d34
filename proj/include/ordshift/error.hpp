#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ordshift {

enum class ErrorCode {
  invalid_input,
  ordering_violation,
  data,
  spec,
  parse,
  fit,
  usage,
  nesting_violation,
};

/// Stable machine-readable prefix for an error code, e.g. "E_DATA".
const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& message)
      : Error(ErrorCode::invalid_input, message) {}
};

/// Cumulative predictors out of order. `index` is the 1-based threshold r
/// with eta_r < eta_{r-1}.
class OrderingViolation : public Error {
 public:
  OrderingViolation(int index, const std::string& message)
      : Error(ErrorCode::ordering_violation, message), index_(index) {}

  int index() const noexcept { return index_; }

 private:
  int index_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(ErrorCode::data, message) {}
};

class SpecError : public Error {
 public:
  explicit SpecError(const std::string& message) : Error(ErrorCode::spec, message) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error(ErrorCode::parse, message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& message) : Error(ErrorCode::fit, message) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error(ErrorCode::usage, message) {}
};

class NestingViolation : public Error {
 public:
  explicit NestingViolation(const std::string& message)
      : Error(ErrorCode::nesting_violation, message) {}
};

}  // namespace ordshift
