#pragma once

#include <stdexcept>
#include <string>

namespace qcollapse {

// Errors are split into two families so front ends can map them onto exit
// codes: bad input (the request itself is invalid) versus numerical failure
// (the request was valid but an algorithm could not deliver).
enum class ErrorKind { validation, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define QCOLLAPSE_DEFINE_ERROR(Name, Kind)                    \
  class Name : public Error {                                 \
   public:                                                    \
    explicit Name(const std::string& what)                    \
        : Error(ErrorKind::Kind, what) {}                     \
  };

QCOLLAPSE_DEFINE_ERROR(InvalidInput, validation)
QCOLLAPSE_DEFINE_ERROR(FallConditionViolated, validation)
QCOLLAPSE_DEFINE_ERROR(DomainError, validation)
QCOLLAPSE_DEFINE_ERROR(PoleError, validation)
QCOLLAPSE_DEFINE_ERROR(OverflowError, numerical)
QCOLLAPSE_DEFINE_ERROR(ConvergenceError, numerical)
QCOLLAPSE_DEFINE_ERROR(FitError, numerical)
QCOLLAPSE_DEFINE_ERROR(QuadratureError, numerical)
QCOLLAPSE_DEFINE_ERROR(SolverError, numerical)

#undef QCOLLAPSE_DEFINE_ERROR

}  // namespace qcollapse
