#include "aksvd/error.hpp"

namespace aksvd {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CompatibilityMissing: return "CompatibilityMissing";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::SampleTooLarge: return "SampleTooLarge";
    case ErrorCode::SubproblemRankDeficient: return "SubproblemRankDeficient";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::ToleranceUnreachable: return "ToleranceUnreachable";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonNumericFeature: return "NonNumericFeature";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

bool is_user_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite:
    case ErrorCode::ZeroMatrix:
    case ErrorCode::DegenerateKernel:
    case ErrorCode::SubproblemRankDeficient:
    case ErrorCode::ToleranceUnreachable:
    case ErrorCode::SingularSystem:
      return false;
    default:
      return true;
  }
}

}  // namespace aksvd
