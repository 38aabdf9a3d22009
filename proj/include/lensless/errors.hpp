#pragma once

#include <stdexcept>
#include <string>

namespace lensless {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that cannot be combined (mask larger than image, batch size mismatch, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value violates a domain type invariant (non-binary mask cell, pixel outside [0,1], ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training hit a non-finite loss; the message carries the diagnostic state.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lensless
