#pragma once

#include <stdexcept>
#include <string>

namespace kslab {

/// Invalid or inconsistent user input (config keys, parameters, grid sizes).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. gamma at s <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Linear solver failed to reach its tolerance; carries the achieved residual.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// File-format violations in snapshot or results files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kslab
