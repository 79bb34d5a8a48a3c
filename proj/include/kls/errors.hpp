// Error types. Library code throws kls::Error; the CLI maps the kind to an
// exit code (config -> 2, solver -> 3, everything numeric -> 1).
#pragma once

#include <stdexcept>
#include <string>

namespace kls {

enum class ErrorKind {
  Domain,          // argument outside the documented domain
  Validation,      // malformed input data (knots, patches, configs)
  SingularSurface, // degenerate parameterization
  Schema,          // load-data / sidecar file does not match the expected layout
  GridMismatch,    // load-data grid differs from the requested quadrature
  NonFinite,       // NaN or Inf where finite data is required
  NotSpd,          // Cholesky met a non-positive pivot
  Eigen,           // eigensolver failure
  InsufficientData // too few points for a rate fit
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Cholesky failure; pivot() is the 0-based row where the pivot was not positive.
class NotSpdError : public Error {
 public:
  NotSpdError(long pivot, const std::string& what) : Error(ErrorKind::NotSpd, what), pivot_(pivot) {}
  long pivot() const { return pivot_; }

 private:
  long pivot_;
};

const char* to_string(ErrorKind k);

}  // namespace kls
