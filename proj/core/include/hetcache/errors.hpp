#pragma once

#include <stdexcept>
#include <string>

namespace hetcache {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or infeasible input documents (JSON, CLI overrides, policies).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of a numeric routine does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Series non-convergence, bracketing failures and similar.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hetcache
