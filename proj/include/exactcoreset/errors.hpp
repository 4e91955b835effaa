#pragma once

#include <stdexcept>
#include <string>

namespace exactcoreset {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input validation
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};
class InvalidTarget : public Error {
 public:
  using Error::Error;
};
class InvalidClusterCount : public Error {
 public:
  using Error::Error;
};
class LengthMismatch : public Error {
 public:
  using Error::Error;
};
class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

// Algorithmic failure modes
class NoNullspace : public Error {
 public:
  using Error::Error;
};
class TooFewRows : public Error {
 public:
  using Error::Error;
};
class TooFewPoints : public Error {
 public:
  using Error::Error;
};
class NoOverlap : public Error {
 public:
  using Error::Error;
};
class SingularSystem : public Error {
 public:
  using Error::Error;
};

// I/O
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace exactcoreset
