#pragma once

#include <stdexcept>
#include <string>

namespace kgl {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Geometry data fails a structural requirement (rho <= 0, fm(0) != 0, ...).
class InvalidGeometryError : public Error {
 public:
  using Error::Error;
};

// A sampled grid is too coarse for the requested derivative or stencil.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Scalar argument outside the admissible range (negative radius, t < 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Estimate inputs violate an admissibility inequality; message names it.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Radial problem stops admitting a graph before the requested radius.
class ExistenceRadiusError : public Error {
 public:
  ExistenceRadiusError(const std::string& what, double r_star)
      : Error(what), r_star(r_star) {}
  double r_star;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class DiscretizationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgl
