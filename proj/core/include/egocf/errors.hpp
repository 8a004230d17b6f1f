#pragma once

#include <stdexcept>
#include <string>

namespace egocf {

// Error taxonomy shared by every module. Each class maps to one failure
// category named in the module contracts. The CLI reports ConfigError as a
// usage error (exit 2) and the others as runtime failures (exit 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or lengths that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Internal bookkeeping violated (missing gradient, overlapping spans, ...).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Input for which the operation is undefined (zero-norm vectors).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: unknown variant, missing required path, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid user data: empty batch, out-of-range token id, ...
class InputError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file on disk.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace egocf
