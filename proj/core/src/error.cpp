#include "cnet/error.hpp"

namespace cnet {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNotScalar: return "NotScalar";
    case ErrorCode::kDetachedGraph: return "DetachedGraph";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kChannelMismatch: return "ChannelMismatch";
    case ErrorCode::kNonPositiveOutput: return "NonPositiveOutput";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kSpatialMismatch: return "SpatialMismatch";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kBadRate: return "BadRate";
    case ErrorCode::kBadLabel: return "BadLabel";
    case ErrorCode::kMissingGrad: return "MissingGrad";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kSpatialCollapse: return "SpatialCollapse";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kCorruptChecksum: return "CorruptChecksum";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kStratumTooSmall: return "StratumTooSmall";
    case ErrorCode::kUnreadableImage: return "UnreadableImage";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

}  // namespace cnet
