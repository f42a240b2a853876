#pragma once

#include <stdexcept>
#include <string>

namespace lilmc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state, parameter or input lies outside the admissible domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An input object violates its declared invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The stationary equation has more than one normalized solution.
class NonUniqueStationary : public Error {
 public:
  using Error::Error;
};

/// The asymptotic variance is (numerically) zero.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

/// A stage needs a contraction certificate and none was produced.
class NoGapCertified : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration was requested on an instance that is too large.
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

}  // namespace lilmc
