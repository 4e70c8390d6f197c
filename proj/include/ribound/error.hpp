#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ribound {

enum class Errc {
  // data / validation
  DuplicateId,
  NonBinaryTreatment,
  MissingBlock,
  DegenerateBlock,
  DegenerateDesign,
  NonFiniteOutcome,
  LengthMismatch,
  FileNotFound,
  ParseError,
  // computation
  EmptyArm,
  SubsetSizeOutOfRange,
  ZeroVariance,
  ArmTooSmall,
  EnumerationTooLarge,
  NonEIStatistic,
  NonMonotonePValue,
  TooLargeForOracle,
  DegenerateScenario,
  // usage
  InvalidArgument,
};

enum class ErrorCategory { Usage, Data, Computation };

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::NonBinaryTreatment: return "NonBinaryTreatment";
    case Errc::MissingBlock: return "MissingBlock";
    case Errc::DegenerateBlock: return "DegenerateBlock";
    case Errc::DegenerateDesign: return "DegenerateDesign";
    case Errc::NonFiniteOutcome: return "NonFiniteOutcome";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::ParseError: return "ParseError";
    case Errc::EmptyArm: return "EmptyArm";
    case Errc::SubsetSizeOutOfRange: return "SubsetSizeOutOfRange";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::ArmTooSmall: return "ArmTooSmall";
    case Errc::EnumerationTooLarge: return "EnumerationTooLarge";
    case Errc::NonEIStatistic: return "NonEIStatistic";
    case Errc::NonMonotonePValue: return "NonMonotonePValue";
    case Errc::TooLargeForOracle: return "TooLargeForOracle";
    case Errc::DegenerateScenario: return "DegenerateScenario";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

constexpr ErrorCategory category(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateId:
    case Errc::NonBinaryTreatment:
    case Errc::MissingBlock:
    case Errc::DegenerateBlock:
    case Errc::DegenerateDesign:
    case Errc::NonFiniteOutcome:
    case Errc::LengthMismatch:
    case Errc::FileNotFound:
    case Errc::ParseError:
      return ErrorCategory::Data;
    case Errc::InvalidArgument:
      return ErrorCategory::Usage;
    default:
      return ErrorCategory::Computation;
  }
}

/// Every failure surfaced by the library carries a stable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ribound
