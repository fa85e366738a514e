#pragma once

#include <stdexcept>
#include <string>

#include "covpath/types.hpp"

namespace covpath {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable tag, used in the CLI's JSON error body.
  virtual const char* kind() const noexcept { return "error"; }
};

class NotSymmetricError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "not_symmetric"; }
};

class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "not_positive_definite"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension_mismatch"; }
};

class DegenerateParameterError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_parameter"; }
};

class ContinuationBreakdownError : public Error {
 public:
  ContinuationBreakdownError(const std::string& what, double tau)
      : Error(what), tau_(tau) {}
  const char* kind() const noexcept override { return "continuation_breakdown"; }
  double tau() const noexcept { return tau_; }

 private:
  double tau_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, Matrix best, double residual)
      : Error(what), best_(std::move(best)), residual_(residual) {}
  const char* kind() const noexcept override { return "nonconvergence"; }
  const Matrix& best_iterate() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Matrix best_;
  double residual_;
};

/// Line search could not reduce the residual; carries the best iterate found.
class StagnationError : public NonConvergenceError {
 public:
  using NonConvergenceError::NonConvergenceError;
  const char* kind() const noexcept override { return "stagnation"; }
};

class FlowError : public Error {
 public:
  FlowError(const std::string& what, double t) : Error(what), t_(t) {}
  const char* kind() const noexcept override { return "lost_positive_definiteness"; }
  double t() const noexcept { return t_; }

 private:
  double t_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line) : Error(what), line_(line) {}
  const char* kind() const noexcept override { return "parse_error"; }
  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace covpath
