#pragma once

#include <stdexcept>
#include <string>

namespace subcal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Value lies outside the range of a monotone function being inverted.
class RangeError : public Error {
public:
  using Error::Error;
};

/// A quadrature did not reach its tolerance; carries the partial result.
class QuadratureError : public Error {
public:
  QuadratureError(const std::string& what, double estimate, double error)
      : Error(what + " (estimate " + std::to_string(estimate) + ", error " +
              std::to_string(error) + ")"),
        estimate_(estimate),
        error_(error) {}

  double estimate() const { return estimate_; }
  double error() const { return error_; }

private:
  double estimate_;
  double error_;
};

/// The premise of a theorem check is not met, so the check refuses to run.
class HypothesisError : public Error {
public:
  using Error::Error;
};

/// Generator or function is degenerate for the requested operation.
class DegenerateError : public Error {
public:
  using Error::Error;
};

}  // namespace subcal
