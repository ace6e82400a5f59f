#pragma once

#include <stdexcept>
#include <string>

namespace mmloc {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad parameters, inconsistent scenarios, mismatched keys.
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// A numerical routine could not produce a usable result.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// A region has no feasible grid point inside the search box.
class EmptyRegion : public Error {
public:
  using Error::Error;
};

/// Bound propagation left some sensor-anchor pair without a bound.
class UnreachableAnchor : public Error {
public:
  using Error::Error;
};

}  // namespace mmloc
