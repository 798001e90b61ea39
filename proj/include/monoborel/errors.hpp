#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace monoborel {

enum class ErrorKind {
  dimension,
  domain,
  insufficient_data,
  configuration,
  degeneracy,
  not_summable,
  accuracy,
  singular_direction,
  precondition,
  numeric,
  conditioning,
  usage,
};

std::string_view to_string(ErrorKind kind);

/// Base of every library error; carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& w) : Error(ErrorKind::dimension, w) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& w) : Error(ErrorKind::insufficient_data, w) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& w) : Error(ErrorKind::configuration, w) {}
};

class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& w) : Error(ErrorKind::degeneracy, w) {}
};

class NotSummableError : public Error {
 public:
  explicit NotSummableError(const std::string& w) : Error(ErrorKind::not_summable, w) {}
};

class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& w, double achieved)
      : Error(ErrorKind::accuracy, w), achieved_(achieved) {}
  [[nodiscard]] double achieved_tolerance() const { return achieved_; }

 private:
  double achieved_;
};

class SingularDirectionError : public Error {
 public:
  SingularDirectionError(const std::string& w, std::vector<double> offenders)
      : Error(ErrorKind::singular_direction, w), offenders_(std::move(offenders)) {}
  [[nodiscard]] const std::vector<double>& offenders() const { return offenders_; }

 private:
  std::vector<double> offenders_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& w) : Error(ErrorKind::precondition, w) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& w) : Error(ErrorKind::numeric, w) {}
};

class ConditioningError : public Error {
 public:
  explicit ConditioningError(const std::string& w) : Error(ErrorKind::conditioning, w) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& w) : Error(ErrorKind::usage, w) {}
};

}  // namespace monoborel
