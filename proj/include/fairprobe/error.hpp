#pragma once

#include <stdexcept>
#include <string>

namespace fairprobe {

enum class ErrorCode {
  MissingLabel,
  EmptyRow,
  EmptyTable,
  EmptyGroup,
  ZeroMean,
  ZeroMax,
  ZeroTau,
  DegenerateDiagonal,
  SingularConfusion,
  SingularMatrix,
  ZeroPrior,
  UndefinedPlugin,
  StrictModeEmptyGroup,
  ZeroVariance,
  EmptyClass,
  SingleClass,
  KernelTooLarge,
  DimensionMismatch,
  EmptyReference,
  BadMagic,
  TruncatedFile,
  NonFiniteValue,
  UnknownSegment,
  DuplicateImageId,
  InvalidInput,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fairprobe
