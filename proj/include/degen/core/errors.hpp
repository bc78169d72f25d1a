#pragma once

#include <stdexcept>
#include <string>

namespace degen {

/// Failure categories. They map one-to-one onto the CLI exit codes.
enum class ErrorKind {
  InvalidInput,       // malformed data or violated preconditions
  UnsupportedRing,    // operation not defined for this coefficient family
  HypothesisUnmet,    // a required hypothesis does not hold on this input
  PrecisionLimited,   // answer could change beyond working precision
  Inconsistency,      // a verified theorem would be contradicted
};

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

inline void require(bool cond, const std::string& what,
                    ErrorKind kind = ErrorKind::InvalidInput) {
  if (!cond) throw Error(kind, what);
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::UnsupportedRing: return "UnsupportedRing";
    case ErrorKind::HypothesisUnmet: return "HypothesisUnmet";
    case ErrorKind::PrecisionLimited: return "PrecisionLimited";
    case ErrorKind::Inconsistency: return "Inconsistency";
  }
  return "Unknown";
}

}  // namespace degen
