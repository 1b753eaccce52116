#pragma once

#include <stdexcept>
#include <string>

namespace ldd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File contents do not follow the expected layout (magic, version,
/// truncation, checksum, schema).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Two descriptors or databases were built with incompatible settings.
class MetaMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace ldd
