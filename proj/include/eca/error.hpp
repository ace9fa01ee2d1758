#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eca {

enum class ErrorCode {
  DimensionMismatch,
  RankDeficient,
  BadColumnNormalization,
  InvalidFactor,
  InvalidDirichlet,
  NegativeAlpha0,
  EmptyCorpus,
  EmptyAccumulator,
  OptionsMismatch,
  RankCollapse,
  SingularProjectedPairs,
  InsufficientRank,
  SingularProjection,
  NonPositiveColumnSum,
  AllZeroAfterClip,
  NegativeRate,
  InvalidTransition,
  InvalidOptions,
  MalformedHeader,
  MalformedLine,
  IndexOutOfRange,
  CountNonPositive,
  VocabLengthMismatch,
  Io,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library. `code()` is stable and is what the
/// CLI reports in its structured error output.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace eca
