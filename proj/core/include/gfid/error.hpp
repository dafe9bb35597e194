#pragma once

#include <stdexcept>
#include <string>

namespace gfid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Layer geometry that does not produce an integral output size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// (filter width, stride) pair the engine has no tile configuration for.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// Tensor or matrix extents that disagree with a layer description.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Work that does not fit in the partial-sum memories.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Unknown network name or unresolvable descriptor.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of a formula was not met.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace gfid
