#pragma once

#include <stdexcept>
#include <string>

namespace aksvd {

enum class ErrorCode {
  NonFinite,
  ZeroMatrix,
  ShapeMismatch,
  RankTooLarge,
  DimensionMismatch,
  CompatibilityMissing,
  LengthMismatch,
  DegenerateKernel,
  SampleTooLarge,
  SubproblemRankDeficient,
  ZeroColumn,
  ToleranceUnreachable,
  SingularSystem,
  SingleClass,
  DegreeTooLarge,
  EmptyGrid,
  ParseError,
  NonNumericFeature,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the CLI) can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

/// True for codes that indicate bad user input rather than a numerical failure.
bool is_user_error(ErrorCode code);

}  // namespace aksvd
