#pragma once

#include <stdexcept>
#include <string>

namespace consfem {

/// Invalid user-supplied parameter (level out of range, unsupported degree, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called on data that does not satisfy its precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Factorization or solve failure.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace consfem
