#pragma once

#include <stdexcept>
#include <string>

namespace fusioncurve {

/// Base class for all library failures. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (spline settings, penalty constants, weight scheme).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a function, e.g. a time outside the basis interval.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Linear-algebra breakdown (singular or non-PD systems, rank deficiency).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Known-group estimation with an empty or unusable group.
class GroupingError : public Error {
 public:
  using Error::Error;
};

}  // namespace fusioncurve
