#pragma once

#include <stdexcept>
#include <string>

namespace diffspline {

// Base class for all library failures. `code()` is the stable
// machine-readable tag the CLI prints as `error: <code>: <message>`.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Operands live on different grids (dim or n mismatch).
class IncompatibleGridError : public Error {
 public:
  explicit IncompatibleGridError(const std::string& message)
      : Error("incompatible-grid", message) {}
};

// A map's Jacobian determinant dropped to or below the positivity floor.
class DegenerateMapError : public Error {
 public:
  explicit DegenerateMapError(const std::string& message)
      : Error("degenerate-map", message) {}
};

// Fixed-point inversion failed to reach tolerance; carries the last residual.
class InversionFailureError : public Error {
 public:
  InversionFailureError(const std::string& message, double residual)
      : Error("inversion-failure", message), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A time integration produced non-finite or absurdly large nodal values;
// carries the index of the offending time node.
class BlowupError : public Error {
 public:
  BlowupError(const std::string& message, int time_index)
      : Error("blow-up", message), time_index_(time_index) {}
  int time_index() const { return time_index_; }

 private:
  int time_index_;
};

// A constructor or configuration precondition was violated.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("validation-error", message) {}
};

// File could not be read, written, or parsed.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io-error", message) {}
};

}  // namespace diffspline
