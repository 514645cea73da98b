#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace curvrig {

/// Malformed or inconsistent arguments (bad geometry, size mismatch, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension outside what an operation supports (e.g. n = 2 for A(x)).
class UnsupportedDimension : public InputError {
 public:
  using InputError::InputError;
};

/// Value outside the mathematical domain of a formula (u <= 0 in a power law).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mesh assembly failure; carries the offending cell index.
class AssemblyError : public std::runtime_error {
 public:
  AssemblyError(const std::string& what, std::size_t cell)
      : std::runtime_error(what), cell_(cell) {}
  [[nodiscard]] std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

/// Iterative solver failure. Keeps the residual history for diagnostics.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}

  [[nodiscard]] const std::vector<double>& residual_history() const noexcept { return residuals_; }
  [[nodiscard]] double last_residual() const noexcept {
    return residuals_.empty() ? -1.0 : residuals_.back();
  }

 private:
  std::vector<double> residuals_;
};

/// Floating-point breakdown (a positivity floor violated, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace curvrig
