#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mdiff {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// Evaluation requested at a Green's function singularity (x == x').
struct SingularityError : Error {
  using Error::Error;
};

/// Value outside representable range; carries the threshold that was hit.
struct RangeError : Error {
  RangeError(const std::string& what, double threshold_)
      : Error(what), threshold(threshold_) {}
  double threshold;
};

/// Requested geometry/mode combination is not implemented.
struct UnsupportedError : Error {
  using Error::Error;
};

/// A linear solve was (near-)singular.
struct ConditioningError : Error {
  ConditioningError(const std::string& what, double cond_estimate_)
      : Error(what), cond_estimate(cond_estimate_) {}
  double cond_estimate;
};

/// An iteration failed to converge; keeps the residual history for diagnostics.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : Error(what), residual_history(std::move(residuals)) {}
  std::vector<double> residual_history;
};

/// A series or quadrature could not reach its accuracy target.
struct AccuracyError : Error {
  using Error::Error;
};

/// Advisory: the requested outer-field point is too close to a compartment;
/// the inner expansion should be used instead.
struct NearCompartmentError : Error {
  NearCompartmentError(const std::string& what, int compartment_)
      : Error(what), compartment(compartment_) {}
  int compartment;
};

/// Event-ordering failure in an ODE run (e.g. simultaneous extinctions).
struct EventOrderingError : Error {
  EventOrderingError(const std::string& what, std::vector<double> state_)
      : Error(what), state(std::move(state_)) {}
  std::vector<double> state;
};

}  // namespace mdiff
