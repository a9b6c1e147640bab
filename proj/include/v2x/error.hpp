#pragma once

#include <stdexcept>
#include <string>

namespace v2x {

enum class ErrorKind {
  kInvalidArgument,
  kDegenerateInput,
  kShapeMismatch,
  kInvalidAction,
  kInvalidDistribution,
  kNanDetected,
  kBudgetExceeded,
  kMissingTrace,
  kConfigInvalid,
  kIoFailure,
  kFormatMismatch,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can emit a
// machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace v2x
