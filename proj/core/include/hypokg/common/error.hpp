#pragma once

#include <stdexcept>
#include <string>

namespace hypokg {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input text did not match the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A precondition on arguments was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A referenced entity (node, session, document) does not exist.
class NotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace hypokg
