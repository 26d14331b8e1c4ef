#pragma once

#include <stdexcept>
#include <string>

namespace cbprior {

// Root of every exception thrown by the library. The CLI maps these to the
// "data error" exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by a caller-supplied value (k out of range, bad cap...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A file exists but its contents cannot be interpreted.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbprior
