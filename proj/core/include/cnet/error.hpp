#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cnet {

enum class ErrorCode {
  kShapeMismatch,
  kNotScalar,
  kDetachedGraph,
  kNonFinite,
  kChannelMismatch,
  kNonPositiveOutput,
  kTooSmall,
  kSpatialMismatch,
  kDimMismatch,
  kBadRate,
  kBadLabel,
  kMissingGrad,
  kConfigInvalid,
  kSpatialCollapse,
  kFormatVersionMismatch,
  kCorruptChecksum,
  kConfigMismatch,
  kEmptyClass,
  kStratumTooSmall,
  kUnreadableImage,
  kEmptyMatrix,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cnet
