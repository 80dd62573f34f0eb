#pragma once

#include <stdexcept>
#include <string>

namespace tshrink {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. log_gamma(0)).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite intermediate or failed factorization.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver did not bracket or did not converge.
class SolverError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Invalid hyperparameters, block counts, experiment names, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace tshrink
