#pragma once

#include <stdexcept>
#include <string>

namespace lodom {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A caller-supplied value violates a precondition (zero-norm quaternion,
// non-rigid matrix, negative extent, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its contents do not match the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A computation is ill-conditioned or produced non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Too few correspondences between two frames to attempt registration.
class InsufficientOverlapError : public Error {
 public:
  using Error::Error;
};

}  // namespace lodom
