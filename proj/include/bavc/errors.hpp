#pragma once

#include <stdexcept>
#include <string>

namespace bavc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Probability mass lost to a Fock cutoff exceeds the configured tolerance.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue fell below the clipping floor; not attributable to roundoff.
class NegativeEigenvalue : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyFamily : public Error {
 public:
  using Error::Error;
};

class RejectionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace bavc
