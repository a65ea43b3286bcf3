#pragma once

#include <stdexcept>
#include <string>

namespace censreg {

// Base class so callers can catch everything from this library in one clause.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a numerical kernel (non-finite input, gamma <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A data row violates the model's support. Carries the offending row when known
// so CLI messages can point at it (-1 means "not row specific").
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg, long row = -1)
      : Error(msg), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

// Design matrix is rank deficient (e.g. duplicated column).
class CollinearityError : public Error {
 public:
  using Error::Error;
};

// Dataset cannot identify the model at all (too few rows, all censored, ...).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be invertible is numerically singular. Carries the
// smallest eigenvalue magnitude that tripped the check.
class NonsingularityError : public Error {
 public:
  explicit NonsingularityError(const std::string& msg, double min_eig)
      : Error(msg), min_eig_(min_eig) {}
  double min_eig() const { return min_eig_; }

 private:
  double min_eig_;
};

// Simulation config would truncate away essentially all mass for some x.
class PathologicalDgpError : public Error {
 public:
  using Error::Error;
};

// File read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration (CLI flags, validation battery setup).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The independent numerical oracle (quadrature) failed to converge; a check
// result would be meaningless, so this is fatal for the check.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace censreg
