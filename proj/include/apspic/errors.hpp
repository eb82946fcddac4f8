#pragma once

#include <stdexcept>
#include <string>

namespace apspic {

/// Input outside the admissible set of a kernel (degenerate denominators,
/// out-of-domain field queries, incompatible sources).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Linear solver failed to meet its residual contract.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Malformed or invalid configuration. `field` names the offending key when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apspic
