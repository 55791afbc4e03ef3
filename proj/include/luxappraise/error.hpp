#pragma once

#include <stdexcept>
#include <string>

namespace luxappraise {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A record or argument violates a type invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A line in a record file could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure (unreadable or unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed request to the annotation service.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Request conflicts with existing state (duplicate submission).
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// Referenced entity does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace luxappraise
