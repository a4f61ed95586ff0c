#pragma once

#include <stdexcept>
#include <string>

namespace copula {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the unit square, malformed rectangle, bad resolution.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input that does not describe a copula (matrix not doubly stochastic,
/// negative H-volume, generator out of range, overlapping intervals).
class InvalidCopula : public Error {
 public:
  using Error::Error;
};

/// Requested grid resolution exceeds the configured cap.
class ResolutionOverflow : public Error {
 public:
  using Error::Error;
};

class NotStochasticallyIncreasing : public Error {
 public:
  using Error::Error;
};

class NotIdempotent : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized copula description.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace copula
