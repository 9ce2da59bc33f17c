#pragma once

#include <stdexcept>

namespace mcml {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// (y, x) lies outside the model domain.
struct DomainError : Error {
  using Error::Error;
};

// Vector or matrix size disagrees with the model's parameter dimension.
struct DimensionError : Error {
  using Error::Error;
};

// Operation needs an enumerable response space and the model has none.
struct NoOracleError : Error {
  using Error::Error;
};

// The likelihood has no finite maximizer (e.g. all-equal binary responses).
struct DegenerateDataError : Error {
  using Error::Error;
};

// Instrumental density vanishes somewhere on the model support.
struct DominationError : Error {
  using Error::Error;
};

// Every importance weight underflowed after the max-shift.
struct NumericalUnderflowError : Error {
  using Error::Error;
};

// Too few observations or draws for a covariance estimate.
struct InsufficientDataError : Error {
  using Error::Error;
};

// Plug-in Hessian matrix is numerically singular.
struct SingularHessianError : Error {
  using Error::Error;
};

// Combined covariance V/n + W/m is not positive definite.
struct SingularCovarianceError : Error {
  using Error::Error;
};

// Invalid experiment or model configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input file (CSV dataset, JSON config).
struct ParseError : Error {
  using Error::Error;
};

}  // namespace mcml
