#pragma once

#include <stdexcept>
#include <string>

namespace noma {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative method exhausted its evaluation budget.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Root bracket endpoints do not straddle a sign change.
class BadBracket : public Error {
 public:
  using Error::Error;
};

/// E_b/N_0 at or below the minimum energy per bit.
class NoSolution : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Rate is zero, so E_b/N_0 is undefined.
class DegenerateRate : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Scheme combination for which no formula is available.
class UnsupportedScheme : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Exact integer result would not fit the fixed-width representation.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Invalid problem dimensions for a Monte Carlo routine.
class SizeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Cholesky factorization of a matrix that should be positive definite failed.
class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace noma
