#pragma once

#include <stdexcept>
#include <string>

namespace mmf {

// Base of every error raised by the library. The CLI maps InvalidArgument to
// exit code 1 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something that violates a precondition (shape mismatch,
// out-of-range parameter, malformed file contents).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Registered in a registry but intentionally without an implementation.
class NotImplemented : public Error {
 public:
  using Error::Error;
};

}  // namespace mmf
