#include "approxk/error.hpp"

namespace approxk {

std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorKind::ClosureFailure: return "ClosureFailure";
    case ErrorKind::AmbiguousIntersection: return "AmbiguousIntersection";
    case ErrorKind::DecompositionFailure: return "DecompositionFailure";
    case ErrorKind::NotAClass: return "NotAClass";
    case ErrorKind::NotEquivalent: return "NotEquivalent";
    case ErrorKind::PathTooCoarse: return "PathTooCoarse";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NotQuantized: return "NotQuantized";
    case ErrorKind::DefectTooLarge: return "DefectTooLarge";
    case ErrorKind::SpectralAmbiguity: return "SpectralAmbiguity";
    case ErrorKind::NotCloseEnough: return "NotCloseEnough";
    case ErrorKind::RoundingUnstable: return "RoundingUnstable";
    case ErrorKind::NotAContraction: return "NotAContraction";
    case ErrorKind::NeedsHomotopyNormalization: return "NeedsHomotopyNormalization";
    case ErrorKind::ExactnessViolation: return "ExactnessViolation";
    case ErrorKind::IotaNotZero: return "IotaNotZero";
    case ErrorKind::NoWitness: return "NoWitness";
    case ErrorKind::ReconstructionFailed: return "ReconstructionFailed";
    case ErrorKind::PairNotUniform: return "PairNotUniform";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail, double value)
    : std::runtime_error(std::string(error_name(kind)) + ": " + detail),
      kind_(kind),
      value_(value) {}

void fail(ErrorKind kind, const std::string& detail, double value) {
  throw Error(kind, detail, value);
}

}  // namespace approxk
