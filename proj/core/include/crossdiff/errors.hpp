#pragma once

#include <stdexcept>
#include <string>

namespace crossdiff {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input value outside the domain of an operation (negative fraction, etc.).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Cell averages or states that leave [0,1] or violate the volume-filling bound.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A mesh that violates one of the admissibility invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A model evaluator hit a vanishing denominator (alpha or a(u_sigma) equal to zero).
class SingularDenominator : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Entropy functions that do not define a unique edge mean.
class NoRootError : public Error {
 public:
  using Error::Error;
};

/// Failure of a nonlinear time step. Adaptive stepping reacts by shrinking dt.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

class NewtonDiverged : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

class LinearSolveFailure : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

/// Adaptive stepping would need a step below dt_min.
class DtUnderflow : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace crossdiff
