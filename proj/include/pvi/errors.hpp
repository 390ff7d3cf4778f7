#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pvi {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shrinking a convex set left nothing with nonempty interior.
class EmptyInteriorError : public Error {
 public:
  using Error::Error;
};

/// An obstacle set escaped the declared uniform bounding ball.
class UniformBoundViolatedError : public Error {
 public:
  using Error::Error;
};

/// The separation witness left the shrunken obstacle at some grid node.
class MarginViolatedError : public Error {
 public:
  MarginViolatedError(const std::string& what, std::size_t time_step, std::size_t node)
      : Error(what), time_step(time_step), node(node) {}
  std::size_t time_step = 0;
  std::size_t node = 0;
};

/// Coefficient failed the pointwise ellipticity probe.
class EllipticityViolatedError : public Error {
 public:
  EllipticityViolatedError(const std::string& what, std::size_t node)
      : Error(what), node(node) {}
  std::size_t node = 0;
};

/// Iterative linear solve exceeded its iteration cap.
class SolverDivergedError : public Error {
 public:
  using Error::Error;
};

/// Picard iteration for an implicit step failed to contract.
class PicardDivergedError : public Error {
 public:
  PicardDivergedError(const std::string& what, std::size_t time_step)
      : Error(what), time_step(time_step) {}
  std::size_t time_step = 0;
};

/// Successive penalty rungs stopped contracting.
class NotConvergingError : public Error {
 public:
  using Error::Error;
};

/// A minimality / variational-inequality test function left the obstacle.
class TestFunctionInfeasibleError : public Error {
 public:
  TestFunctionInfeasibleError(const std::string& what, std::size_t time_step, std::size_t node)
      : Error(what), time_step(time_step), node(node) {}
  std::size_t time_step = 0;
  std::size_t node = 0;
};

/// Driver produced NaN/Inf output.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Monte Carlo standard error too large for the requested check.
class InsufficientPathsError : public Error {
 public:
  using Error::Error;
};

/// Config file syntax error.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line) : Error(what), line(line) {}
  std::size_t line = 0;
};

/// Config parsed but failed semantic validation.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::string field)
      : Error(what), field(std::move(field)) {}
  std::string field;
};

/// File system failure while emitting results.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pvi
