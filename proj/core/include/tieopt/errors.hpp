#pragma once

#include <stdexcept>
#include <string>

namespace tieopt {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed case document (syntax, missing field). Message carries location.
struct ParseError : Error {
  using Error::Error;
};

/// Structurally valid input that violates a model invariant. Message names it.
struct ValidationError : Error {
  using Error::Error;
};

/// Disconnected network or zero reactance; the susceptance system is singular.
struct SingularNetwork : Error {
  using Error::Error;
};

/// Generator cost not representable as h*g^2 + b*g (+ constant).
struct UnsupportedCost : Error {
  using Error::Error;
};

/// Factorization breakdown or residuals beyond tolerance after regularization.
struct NumericalFailure : Error {
  using Error::Error;
};

struct IterationLimit : Error {
  using Error::Error;
};

/// No feasible dispatch at the requested interchange level.
struct InfeasibleDispatch : Error {
  using Error::Error;
};

/// A scenario's second-stage dispatch is infeasible; message names the scenario.
struct InfeasibleScenario : Error {
  using Error::Error;
};

/// No interchange level is feasible for every scenario.
struct EmptyDomain : Error {
  using Error::Error;
};

/// Evaluation point outside a curve's validity domain.
struct OutOfDomain : Error {
  using Error::Error;
};

/// Curves do not share a usable domain overlap.
struct DomainMismatch : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// Scenario tensor product exceeds the cap and Monte Carlo is disabled.
struct UnsupportedCombination : Error {
  using Error::Error;
};

}  // namespace tieopt
