#pragma once

#include <stdexcept>
#include <string>

namespace gitstab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input matrix or mapped atom is numerically non-invertible / vanishing.
struct SingularInput : Error {
  using Error::Error;
};

// A direction argument has (numerically) zero norm.
struct ZeroDirection : Error {
  using Error::Error;
};

// Atom count exceeds the exponential-enumeration guard.
struct TooManyAtoms : Error {
  using Error::Error;
};

// destabilizing_direction called on a flat that does not violate its bound.
struct NotDestabilizing : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

}  // namespace gitstab
