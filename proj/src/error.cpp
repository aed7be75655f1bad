#include "lipbound/error.hpp"

namespace lipbound {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::UnboundedPartial: return "UnboundedPartial";
    case ErrorCode::WidthExceeded: return "WidthExceeded";
    case ErrorCode::TooWide: return "TooWide";
    case ErrorCode::RatioUndefined: return "RatioUndefined";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DepthTooSmall: return "DepthTooSmall";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::OffsetOutOfRange: return "OffsetOutOfRange";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite:
    case ErrorCode::UnboundedPartial:
    case ErrorCode::RatioUndefined:
      return true;
    default:
      return false;
  }
}

}  // namespace lipbound
