#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hpcai {

enum class ErrorKind {
  InvalidArgument,
  SchemaError,
  ParseError,
  MissingPrecision,
  DegenerateTarget,
  InvalidPower,
  EmptySample,
  DegenerateComm,
  InvalidScaleOrder,
  UnknownCeiling,
  DegenerateBand,
  CeilingAbovePeak,
  IncompletePoint,
  InvalidTransform,
  NothingToPlot,
  IncomparableWorkloads,
  InvalidSchedule,
  InsufficientRuns,
  NotARepetition,
  NotReplicable,
  BatchShardError,
  DuplicateRun,
  IncompleteReport,
  Io,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingPrecision: return "MissingPrecision";
    case ErrorKind::DegenerateTarget: return "DegenerateTarget";
    case ErrorKind::InvalidPower: return "InvalidPower";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::DegenerateComm: return "DegenerateComm";
    case ErrorKind::InvalidScaleOrder: return "InvalidScaleOrder";
    case ErrorKind::UnknownCeiling: return "UnknownCeiling";
    case ErrorKind::DegenerateBand: return "DegenerateBand";
    case ErrorKind::CeilingAbovePeak: return "CeilingAbovePeak";
    case ErrorKind::IncompletePoint: return "IncompletePoint";
    case ErrorKind::InvalidTransform: return "InvalidTransform";
    case ErrorKind::NothingToPlot: return "NothingToPlot";
    case ErrorKind::IncomparableWorkloads: return "IncomparableWorkloads";
    case ErrorKind::InvalidSchedule: return "InvalidSchedule";
    case ErrorKind::InsufficientRuns: return "InsufficientRuns";
    case ErrorKind::NotARepetition: return "NotARepetition";
    case ErrorKind::NotReplicable: return "NotReplicable";
    case ErrorKind::BatchShardError: return "BatchShardError";
    case ErrorKind::DuplicateRun: return "DuplicateRun";
    case ErrorKind::IncompleteReport: return "IncompleteReport";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hpcai
