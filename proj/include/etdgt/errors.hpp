#pragma once

#include <stdexcept>
#include <string>

namespace etdgt {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes, so keep the hierarchy shallow.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that does not satisfy a modelling assumption. Exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidScenario : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class Infeasible : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerical failure inside a solver. Exit code 3.
class SolverError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public SolverError {
 public:
  using SolverError::SolverError;
};

class DegenerateSpectrum : public SolverError {
 public:
  using SolverError::SolverError;
};

class RootFindFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

class LambdaNotContractive : public SolverError {
 public:
  using SolverError::SolverError;
};

class CertificateFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

// Broadcast recorded at an iteration not after the previous one.
class OutOfOrder : public Error {
 public:
  using Error::Error;
};

}  // namespace etdgt
