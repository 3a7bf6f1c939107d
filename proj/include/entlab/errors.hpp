#pragma once

#include <stdexcept>
#include <string>

namespace entlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown, duplicated or overlapping subsystem labels; size mismatches.
class LayoutError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside its domain (negative spectrum under log, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Infeasible sampler or solver parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (e.g. non-Hermitian operator).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A cone-membership certificate failed validation.
class CertificateError : public Error {
 public:
  using Error::Error;
};

/// Recovery maps could not be composed on the given layouts.
class CompositionError : public Error {
 public:
  using Error::Error;
};

}  // namespace entlab
