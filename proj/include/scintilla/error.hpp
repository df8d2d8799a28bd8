#pragma once

#include <stdexcept>
#include <string>

namespace scintilla {

/// Argument outside the documented domain of a function.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Result would exceed the representable range.
class OverflowError : public std::overflow_error {
public:
  using std::overflow_error::overflow_error;
};

/// Operands defined on different wavevector grids.
class GridMismatchError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Requested work exceeds a configured cost guard.
class CostGuardError : public std::length_error {
public:
  using std::length_error::length_error;
};

/// Numerical integration ran out of budget before reaching its tolerance.
class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

private:
  double estimate_;
  double error_;
};

/// Bad or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace scintilla
