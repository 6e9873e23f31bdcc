#pragma once

#include <stdexcept>
#include <string>

namespace qshaper {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation
/// (e.g. a wavelength outside a Sellmeier validity window).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Grid too coarse for the requested feature.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Basis construction preconditions violated (overlaps, degenerate bins).
class BasisError : public Error {
 public:
  using Error::Error;
};

/// Requested more Schmidt modes than the numerical rank supports.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Objects defined on incompatible grids or with mismatched dimensions.
class GridError : public Error {
 public:
  using Error::Error;
};

/// SLM position mapping leaves too much of the spectral axis uncovered.
class MappingError : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit failed to converge.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace qshaper
