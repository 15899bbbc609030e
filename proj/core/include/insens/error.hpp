#pragma once

#include <stdexcept>
#include <string>

namespace insens {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad parameters, schema violations, invariant failures.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A computation could not be completed in working precision
// (divergent normalization, singular system, reducible chain).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A query outside the domain an object is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Simulation ended abnormally (absorbing state before warmup, corrupted state).
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace insens
