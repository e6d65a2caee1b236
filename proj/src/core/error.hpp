#pragma once

#include <stdexcept>
#include <string>

namespace puon {

// Mirrors puon_status in the C API one-to-one.
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo,
  kParse,
  kShape,
  kValidation,
  kConfig,
  kNumeric,
  kEmptyTest,
  kNoNeighbor,
  kUndefinedMetric,
  kUnknownId,
  kCheckFailed,
};

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

}  // namespace puon
