#pragma once

#include <stdexcept>
#include <string>

namespace vpme {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// An iterative solver stopped before reaching its tolerance.
class SolverFailure : public Error {
public:
  SolverFailure(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

private:
  double last_residual_;
  int iterations_;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace vpme
