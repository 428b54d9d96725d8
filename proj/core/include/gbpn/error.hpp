#pragma once

#include <stdexcept>
#include <string>

namespace gbpn {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of grids, graphs and parameter sets disagree, or a dimension is zero.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A scalar argument is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its contents are malformed.
class ParseError : public IoError {
 public:
  using IoError::IoError;
};

// Parsed parameters violate an MRF invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The information matrix has a flat direction (an unanchored component) or
// is not positive definite.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

}  // namespace gbpn
