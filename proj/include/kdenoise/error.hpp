#pragma once

#include <stdexcept>
#include <string>

namespace kdenoise {

enum class ErrorCode {
  kInvalidMeasure,
  kDimensionMismatch,
  kInvalidDomain,
  kInvalidConfig,
  kIo,
  kScaleLimit,
};

const char* to_string(ErrorCode code);

/// Structured error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kdenoise
