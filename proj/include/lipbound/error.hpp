#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lipbound {

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  ShapeMismatch,
  TooLarge,
  CyclicGraph,
  UnboundedPartial,
  WidthExceeded,
  TooWide,
  RatioUndefined,
  DimensionTooLarge,
  EmptyDataset,
  DepthTooSmall,
  ParseError,
  SchemaViolation,
  OffsetOutOfRange,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by the numbers themselves rather than by malformed
/// input; the CLI maps these to exit code 3.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lipbound
