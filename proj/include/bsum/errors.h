// Exception types shared by every module.
//
// Precondition and input problems map to CLI exit code 2, verification
// failures to exit code 3.

#ifndef BSUM_ERRORS_H_
#define BSUM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace bsum {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The requested combination (format, method, metric, ...) has no
// implementation or no proven bound.
class UnsupportedError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Arithmetic without a defined result, such as inf + (-inf).
class ArithmeticError : public Error {
 public:
  using Error::Error;
};

// A malformed file or argument; `field` names the offending entry.
class InputError : public PreconditionError {
 public:
  InputError(std::string field, const std::string& message)
      : PreconditionError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A search would exceed its configured work budget.
class GuardExceededError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// A computed result contradicts the value it was supposed to realize.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace bsum

#endif  // BSUM_ERRORS_H_
