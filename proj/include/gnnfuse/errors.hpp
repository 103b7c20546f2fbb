#pragma once

#include <stdexcept>
#include <string>

namespace gnnfuse {

// Base of every error the library raises. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible matrix or tensor dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed input, violated precondition or inconsistent files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gnnfuse
