#pragma once

#include <stdexcept>
#include <string>

namespace wscat {

// Base class for all library errors so callers can catch them in one clause.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Spectral content would be pushed past the Nyquist frequency of a target grid.
class BandwidthExceeded : public Error {
 public:
  using Error::Error;
};

// A filter or requested scale does not fit under the grid's Nyquist frequency.
class NyquistViolation : public Error {
 public:
  using Error::Error;
};

// A tabulated filter profile violates its declared support or positivity.
class InvalidProfile : public Error {
 public:
  using Error::Error;
};

// Two objects that must share a grid do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

// A path references a scale that is not part of the filter bank.
class UnknownScale : public Error {
 public:
  using Error::Error;
};

// A scattering cascade would exceed the configured path budget.
class DepthBudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Two scattering coefficient sets are not comparable (bank, depth or grid differ).
class StructureMismatch : public Error {
 public:
  using Error::Error;
};

// A warp moves signal content across the periodization seam.
class DomainEscape : public Error {
 public:
  using Error::Error;
};

// A deformation violates the usability bound sup|tau'| <= 1/2.
class UsabilityViolation : public Error {
 public:
  using Error::Error;
};

// A constructed object violates one of its parameter constraints.
class ParameterViolation : public Error {
 public:
  using Error::Error;
};

// Invalid configuration input (bad key, bad value, unparsable file).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wscat
