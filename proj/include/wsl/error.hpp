#pragma once

#include <stdexcept>
#include <string>

namespace wsl {

/// Base of all library errors. `module` names the component that raised it
/// so the CLI can attach module-level diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// An input violated an operation's precondition (bad grid, negative
/// curvature where positivity is required, mismatched shapes, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A computation ran but its result failed a self-check (non-convergent
/// extrapolation ladder, residual above tolerance, divergent tail).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Configuration did not match the documented schema.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("config", what) {}
};

}  // namespace wsl
