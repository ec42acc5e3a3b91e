#pragma once

#include <stdexcept>
#include <string>

namespace clustergas {

/// Argument outside the mathematical domain of an operation (e.g. r <= 0).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A parameter violates the hypothesis of a bound or estimator.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Request outside what a numerical routine supports (dimension, size).
class CapabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to produce a trustworthy value.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unknown configuration input.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace clustergas
