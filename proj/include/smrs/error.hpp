#pragma once

#include <stdexcept>
#include <string>

namespace smrs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Joint survival of the regime clocks did not decay below the truncation
/// threshold inside the allowed window (usually a mis-specified tabulated hazard).
class TruncationFailure : public Error {
 public:
  using Error::Error;
};

/// Inversion of a cumulative hazard failed to bracket or converge.
class RootFindFailure : public Error {
 public:
  using Error::Error;
};

/// Integrated diffusion matrix is not positive definite.
class SingularCovariance : public Error {
 public:
  using Error::Error;
};

/// Tensor / sparse quadrature requested above the configured dimension cap.
class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

/// Picard iteration hit its iteration cap.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// Model data violates a structural assumption (positivity, irreducibility,
/// invertibility, payoff envelope, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Scenario file could not be parsed. `where()` names the JSON field or line.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string where, const std::string& what)
      : ValidationError(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace smrs
