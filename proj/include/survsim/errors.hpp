#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace survsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments or configuration (rho out of range, empty grid, ...).
struct InvalidParameterError : Error {
  using Error::Error;
};

// Data generation failed (non-finite linear predictor, ...).
struct GenerationError : Error {
  using Error::Error;
};

// Model cannot be told apart from a simpler one: constant covariate,
// single-class response, rank-deficient design.
struct NonIdentifiableError : Error {
  using Error::Error;
};

// Quasi-complete separation in logistic regression.
struct SeparationError : Error {
  using Error::Error;
};

// Monotone partial likelihood: a coefficient is running away.
struct DivergenceError : Error {
  using Error::Error;
};

struct SingularityError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
  ConvergenceError(const std::string& what, std::vector<double> iterate)
      : Error(what), last_iterate(std::move(iterate)) {}

  std::vector<double> last_iterate;  // where the solver stopped, when known
};

struct InsufficientDataError : Error {
  using Error::Error;
};

// Cross-validation could not build event-bearing folds.
struct FoldFailureError : Error {
  using Error::Error;
};

// All-zero design: no lambda path exists.
struct DegeneratePathError : Error {
  using Error::Error;
};

}  // namespace survsim
