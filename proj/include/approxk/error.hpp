#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace approxk {

enum class ErrorKind {
  InvalidInput,
  NotInvertible,
  DefectiveMatrix,
  ClosureFailure,
  AmbiguousIntersection,
  DecompositionFailure,
  NotAClass,
  NotEquivalent,
  PathTooCoarse,
  GridTooCoarse,
  NotQuantized,
  DefectTooLarge,
  SpectralAmbiguity,
  NotCloseEnough,
  RoundingUnstable,
  NotAContraction,
  NeedsHomotopyNormalization,
  ExactnessViolation,
  IotaNotZero,
  NoWitness,
  ReconstructionFailed,
  PairNotUniform,
  SchemaViolation,
};

std::string_view error_name(ErrorKind kind);

// Every numerical failure is reported through this type. `value` carries the
// offending measurement (condition estimate, residual, index) when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail, double value = 0.0);

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }
  double value() const noexcept { return value_; }

 private:
  ErrorKind kind_;
  double value_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& detail, double value = 0.0);

}  // namespace approxk
