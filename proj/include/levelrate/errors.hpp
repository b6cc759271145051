#pragma once

#include <stdexcept>
#include <string>

namespace levelrate {

/// Base of every error thrown by the library. Each subclass maps to one
/// failure category so callers (the CLI in particular) can choose an exit
/// code without parsing messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector lengths disagree with each other or with an objective's dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input outside the domain of a function (NaN/Inf entries, empty vectors).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid numeric argument (step sizes, tolerances, times).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent dataset.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment or risk configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite quantity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Grid sampling hit a non-finite objective value.
class SamplingError : public Error {
 public:
  using Error::Error;
};

}  // namespace levelrate
