#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace monofit {

/// Categories of failure raised by the library.
enum class ErrorKind {
  invalid_argument,
  capacity,
  needs_larger_n,
  precondition_failed,
  degenerate_majorant,
  needs_smaller_kappa,
  calibration_failed,
};

/// Human-readable tag for an error kind ("needs-larger-n", ...).
const char* to_string(ErrorKind kind);

/// Base exception; every error thrown by monofit derives from this.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a construction needs a finer partition.
///
/// `trace` lists the orders tried so far, `detail` names the failing step.
class NeedsLargerN : public Error {
 public:
  NeedsLargerN(const std::string& message, std::vector<int> trace = {},
               std::string detail = {});

  const std::vector<int>& trace() const { return trace_; }
  const std::string& detail() const { return detail_; }

 private:
  std::vector<int> trace_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::invalid_argument, message);
}

}  // namespace monofit
