#pragma once

#include <stdexcept>
#include <string>

namespace debias {

// Failure category; the CLI maps these onto its exit codes.
enum class ErrorKind {
  kUsage = 1,      // bad arguments, contract violations, shape mismatches
  kData = 2,       // unreadable or malformed input files
  kNumerical = 3,  // divergence, gradient-check failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error UsageError(const std::string& what) {
  return Error(ErrorKind::kUsage, what);
}
inline Error DataError(const std::string& what) {
  return Error(ErrorKind::kData, what);
}
inline Error NumericalError(const std::string& what) {
  return Error(ErrorKind::kNumerical, what);
}

}  // namespace debias
