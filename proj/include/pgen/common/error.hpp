#pragma once

#include <stdexcept>
#include <string>

namespace pgen {

// Broad category of a failure. The CLI maps these onto exit codes.
enum class ErrorCategory {
  Shape,
  Config,
  Usage,
  Data,
  Bounds,
  Numeric,
  Training,
  Checkpoint,
  Validation,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorCategory::Shape, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& what) : Error(ErrorCategory::Bounds, what) {}
};

// Too few points for a fit.
class ArityError : public Error {
 public:
  explicit ArityError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

// Inputs outside the domain where a metric is defined.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::Numeric, what) {}
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch, int batch)
      : Error(ErrorCategory::Training, what), epoch_(epoch), batch_(batch) {}

  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

// Partition map or other structural invariant violated by loaded data.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

class CheckpointError : public Error {
 public:
  enum class Kind { BadMagic, UnsupportedVersion, Truncated, ArchMismatch, Malformed };

  CheckpointError(Kind kind, const std::string& what)
      : Error(ErrorCategory::Checkpoint, what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace pgen
