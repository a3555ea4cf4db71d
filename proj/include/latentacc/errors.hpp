#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace latentacc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::size_t pivot, double value)
      : Error("matrix is not positive definite (pivot " + std::to_string(pivot) +
              " = " + std::to_string(value) + ")"),
        pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// A Fisher or coefficient identity failed at its recorded tolerance.
/// Signals an implementation bug rather than bad input.
class IdentityViolation : public Error {
 public:
  using Error::Error;
};

class AlphaOutOfRange : public Error {
 public:
  explicit AlphaOutOfRange(double alpha)
      : Error("alpha must lie in (0, 1], got " + std::to_string(alpha)) {}
};

class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  NonFinite(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

class DegenerateLabels : public Error {
 public:
  using Error::Error;
};

class EnumerationTooLarge : public Error {
 public:
  EnumerationTooLarge(std::size_t n, std::size_t limit)
      : Error("enumeration over labelings requires n <= " + std::to_string(limit) +
              ", got n = " + std::to_string(n)) {}
};

class AlphaGridMismatch : public Error {
 public:
  AlphaGridMismatch(double alpha, std::size_t n)
      : Error("alpha * n must be an integer (alpha = " + std::to_string(alpha) +
              ", n = " + std::to_string(n) + ")") {}
};

/// Raised when more than 1% of Monte Carlo replications abort.
class RunFailed : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace latentacc
