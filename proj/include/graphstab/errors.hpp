#pragma once

#include <stdexcept>
#include <string>

namespace gs {

// Base for all library errors. The CLI maps subclasses to exit codes:
// parse problems -> 2, failed numerical convergence -> 3, everything that
// signals a violated mathematical precondition or invariant -> 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input could not be parsed or fails schema validation.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

// A documented precondition of an operation does not hold (bad dimension,
// point inside an excised region, level at or below a boundary value, ...).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(what) {}
};

// An iterative scheme ran out of refinement budget before reaching its
// tolerance. Callers that can continue with a flagged value should catch it.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(what) {}
};

}  // namespace gs
