#pragma once

#include <stdexcept>
#include <string>

namespace dualgda {

/// Broad failure classes. The CLI maps these to exit codes:
/// usage/io -> 2, data -> 3, numeric -> 4.
enum class ErrorClass { Usage, Io, Data, Numeric };

enum class Errc {
  // usage / io
  Usage,
  IoError,
  InvalidSpec,
  // data validation
  MissingHeader,
  DuplicateSubjectId,
  UnknownDiagnosisLabel,
  NonNumericCell,
  SchemaMismatch,
  AllSubjectsRemoved,
  ClassTooSmall,
  EmptyClass,
  TrainTestOverlap,
  SubsetOutOfRange,
  DimensionMismatch,
  NoSignificantFeatures,
  BothSubsetsEmpty,
  FoldMissingClass,
  // numerical
  DegenerateInput,
  SingularCovariance,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Usage: return "Usage";
    case Errc::IoError: return "IoError";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::DuplicateSubjectId: return "DuplicateSubjectId";
    case Errc::UnknownDiagnosisLabel: return "UnknownDiagnosisLabel";
    case Errc::NonNumericCell: return "NonNumericCell";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::AllSubjectsRemoved: return "AllSubjectsRemoved";
    case Errc::ClassTooSmall: return "ClassTooSmall";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::TrainTestOverlap: return "TrainTestOverlap";
    case Errc::SubsetOutOfRange: return "SubsetOutOfRange";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NoSignificantFeatures: return "NoSignificantFeatures";
    case Errc::BothSubsetsEmpty: return "BothSubsetsEmpty";
    case Errc::FoldMissingClass: return "FoldMissingClass";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::SingularCovariance: return "SingularCovariance";
  }
  return "Unknown";
}

inline ErrorClass errc_class(Errc c) {
  switch (c) {
    case Errc::Usage:
      return ErrorClass::Usage;
    case Errc::IoError:
    case Errc::InvalidSpec:
      return ErrorClass::Io;
    case Errc::DegenerateInput:
    case Errc::SingularCovariance:
      return ErrorClass::Numeric;
    default:
      return ErrorClass::Data;
  }
}

inline const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return "usage";
    case ErrorClass::Io: return "io";
    case ErrorClass::Data: return "data";
    case ErrorClass::Numeric: return "numeric";
  }
  return "internal";
}

inline int error_class_exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage:
    case ErrorClass::Io:
      return 2;
    case ErrorClass::Data:
      return 3;
    case ErrorClass::Numeric:
      return 4;
  }
  return 4;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept { return errc_class(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace dualgda
