#include "fairprobe/error.hpp"

namespace fairprobe {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::EmptyRow: return "EmptyRow";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::ZeroMax: return "ZeroMax";
    case ErrorCode::ZeroTau: return "ZeroTau";
    case ErrorCode::DegenerateDiagonal: return "DegenerateDiagonal";
    case ErrorCode::SingularConfusion: return "SingularConfusion";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::ZeroPrior: return "ZeroPrior";
    case ErrorCode::UndefinedPlugin: return "UndefinedPlugin";
    case ErrorCode::StrictModeEmptyGroup: return "StrictModeEmptyGroup";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::KernelTooLarge: return "KernelTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnknownSegment: return "UnknownSegment";
    case ErrorCode::DuplicateImageId: return "DuplicateImageId";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace fairprobe
