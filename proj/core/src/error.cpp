#include "prnufm/error.hpp"

namespace prnufm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kTooFewImages: return "TooFewImages";
    case ErrorCode::kSizeTooSmall: return "SizeTooSmall";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kBadCrop: return "BadCrop";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace prnufm
