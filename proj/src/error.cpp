#include "v2x/error.hpp"

namespace v2x {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kDegenerateInput: return "degenerate-input";
    case ErrorKind::kShapeMismatch: return "shape-mismatch";
    case ErrorKind::kInvalidAction: return "invalid-action";
    case ErrorKind::kInvalidDistribution: return "invalid-distribution";
    case ErrorKind::kNanDetected: return "nan-detected";
    case ErrorKind::kBudgetExceeded: return "budget-exceeded";
    case ErrorKind::kMissingTrace: return "missing-trace";
    case ErrorKind::kConfigInvalid: return "config-invalid";
    case ErrorKind::kIoFailure: return "io-failure";
    case ErrorKind::kFormatMismatch: return "format-mismatch";
  }
  return "unknown";
}

}  // namespace v2x
