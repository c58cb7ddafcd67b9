#pragma once

#include <stdexcept>
#include <string>

namespace sdarray {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: out-of-domain arguments, invalid geometry, unusable configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

/// Raised when a dipole leaves the range where the sinusoidal current model holds.
class ModelValidityError : public InputError {
 public:
  using InputError::InputError;
};

class GeometryError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// A computation ran but its result cannot be trusted.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public NumericalError {
 public:
  ConditioningError(const std::string& what, double rcond)
      : NumericalError(what), rcond_(rcond) {}

  /// Reciprocal condition estimate of the offending matrix (1-norm).
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

class ResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PassivityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sdarray
