#include "monofit/errors.hpp"

namespace monofit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::needs_larger_n: return "needs-larger-n";
    case ErrorKind::precondition_failed: return "precondition-failed";
    case ErrorKind::degenerate_majorant: return "degenerate-majorant";
    case ErrorKind::needs_smaller_kappa: return "needs-smaller-kappa";
    case ErrorKind::calibration_failed: return "calibration-failed";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

NeedsLargerN::NeedsLargerN(const std::string& message, std::vector<int> trace,
                           std::string detail)
    : Error(ErrorKind::needs_larger_n, message),
      trace_(std::move(trace)),
      detail_(std::move(detail)) {}

void fail(ErrorKind kind, const std::string& message) {
  if (kind == ErrorKind::needs_larger_n) throw NeedsLargerN(message);
  throw Error(kind, message);
}

}  // namespace monofit
