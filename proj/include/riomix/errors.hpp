#pragma once

#include <stdexcept>
#include <string>

namespace riomix {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside its admissible range (negative quantity, bad lambda, ...).
struct DomainError : Error {
  using Error::Error;
};

// Regions in an ancestor/descendant relation were combined.
struct CompositionConflictError : Error {
  using Error::Error;
};

// An IOTable with flow into a zero-output industry.
struct InconsistentTableError : Error {
  using Error::Error;
};

// Cross-region shipping/receiving ledgers do not agree.
struct ReconciliationError : Error {
  using Error::Error;
};

// Virtual-region sampling could not produce a valid selection.
struct SamplingError : Error {
  using Error::Error;
};

// Iterative fitting failed to reach its tolerance, or diverged.
struct ConvergenceError : Error {
  using Error::Error;
};

// A location-quotient denominator vanished.
struct UndefinedQuotientError : Error {
  using Error::Error;
};

// Mismatched vector/matrix dimensions between records or models.
struct DimensionError : Error {
  using Error::Error;
};

// File, schema, or serialization failures.
struct IoError : Error {
  using Error::Error;
};

}  // namespace riomix
