#pragma once

#include <stdexcept>
#include <string>

namespace roofs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (bad mu, empty stream, gamma out of range).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Solver or stream state that contradicts itself (missing feature row,
/// re-delivered feature with different values, empty working sample set).
class InconsistentStateError : public Error {
 public:
  using Error::Error;
};

class InvalidResidualError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Instance too small for the requested operation.
class InstanceTooSmallError : public Error {
 public:
  using Error::Error;
};

class InstanceMismatchError : public Error {
 public:
  using Error::Error;
};

/// File-system or format failure; the message always carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace roofs
