#pragma once

#include <stdexcept>
#include <string>

namespace frost {

enum class ErrorKind {
  usage,
  format,
  data,
  domain,
  numerical,
};

const char* to_string(ErrorKind kind);

/// Base for every error raised by the library. The kind drives the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error(ErrorKind::usage, message) {}
};

/// Malformed input bytes: headers, schemas, truncated files.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error(ErrorKind::format, message) {}
};

/// Well-formed input that cannot be used (empty, missing keys, out of extent).
class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(ErrorKind::data, message) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error(ErrorKind::domain, message) {}
};

/// Divergence, singular systems, non-finite intermediate values.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error(ErrorKind::numerical, message) {}
};

class OutOfExtentError : public DataError {
 public:
  explicit OutOfExtentError(const std::string& message) : DataError(message) {}
};

class UnsupportedVersionError : public FormatError {
 public:
  explicit UnsupportedVersionError(const std::string& message) : FormatError(message) {}
};

}  // namespace frost
