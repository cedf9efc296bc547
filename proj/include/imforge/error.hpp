#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace imforge {

enum class ErrorCode : std::uint8_t {
  OutOfRange,
  SelfLoop,
  EmptySide,
  Overlap,
  SameVertex,
  InvalidArgument,
  NotConverged,
  NotRegular,
  DegenerateCut,
  TooSmall,
  ParityViolation,
  GenerationFailed,
  BadModulus,
  Io,
  Parse,
  DomainError,
  NoPath,
  Insufficient,
  UnitFailed,
  BadPartition,
  DegenerateT,
  PreconditionFailed,
  UnitShortfall,
  Incomplete,
  NoEvenCycle,
  ExpansionFailed,
  NoConnection,
  BadSize,
  Stuck,
  RoutingFailed,
  SampleFailed,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::EmptySide: return "EmptySide";
    case ErrorCode::Overlap: return "Overlap";
    case ErrorCode::SameVertex: return "SameVertex";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NotRegular: return "NotRegular";
    case ErrorCode::DegenerateCut: return "DegenerateCut";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::ParityViolation: return "ParityViolation";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::BadModulus: return "BadModulus";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::Insufficient: return "Insufficient";
    case ErrorCode::UnitFailed: return "UnitFailed";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::DegenerateT: return "DegenerateT";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::UnitShortfall: return "UnitShortfall";
    case ErrorCode::Incomplete: return "Incomplete";
    case ErrorCode::NoEvenCycle: return "NoEvenCycle";
    case ErrorCode::ExpansionFailed: return "ExpansionFailed";
    case ErrorCode::NoConnection: return "NoConnection";
    case ErrorCode::BadSize: return "BadSize";
    case ErrorCode::Stuck: return "Stuck";
    case ErrorCode::RoutingFailed: return "RoutingFailed";
    case ErrorCode::SampleFailed: return "SampleFailed";
  }
  return "Unknown";
}

/// Library exception. `detail` carries the numeric payload some codes have
/// (line number for Parse, found count for Insufficient, stage for UnitFailed);
/// `aux` a second one (StarSpec index for Insufficient).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::int64_t detail = -1, std::int64_t aux = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        detail_(detail),
        aux_(aux) {}

  ErrorCode code() const noexcept { return code_; }
  std::int64_t detail() const noexcept { return detail_; }
  std::int64_t aux() const noexcept { return aux_; }

 private:
  ErrorCode code_;
  std::int64_t detail_;
  std::int64_t aux_;
};

}  // namespace imforge
