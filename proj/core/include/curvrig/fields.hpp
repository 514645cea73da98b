#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace curvrig {

/// Real values sampled at the nodes of a discrete domain.
///
/// Used for curvature fields (R[g], R⁺) as well as generic nodal fields such
/// as u, v = u - 1, u₁ and the ratio β.
struct ScalarField {
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(std::vector<double> v) : values(std::move(v)) {}
  ScalarField(std::initializer_list<double> v) : values(v) {}
  ScalarField(std::size_t size, double fill) : values(size, fill) {}

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  [[nodiscard]] std::span<const double> view() const noexcept { return values; }

  [[nodiscard]] bool all_finite() const noexcept;
};

using FieldOnDomain = ScalarField;

enum class Convention {
  power,        ///< g = u^{4/(n-2)} ḡ, n >= 3
  exponential,  ///< g = e^{2w} ḡ, n = 2
};

/// Conformal factor relating g to the background ḡ.
class ConformalFactor {
 public:
  /// u > 0 everywhere; n >= 3.
  static ConformalFactor power(int n, std::vector<double> u);
  /// Log-factor w for surfaces.
  static ConformalFactor exponential(std::vector<double> w);

  [[nodiscard]] int dimension() const noexcept { return n_; }
  [[nodiscard]] Convention convention() const noexcept { return convention_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

 private:
  ConformalFactor(int n, Convention c, std::vector<double> v)
      : n_(n), convention_(c), values_(std::move(v)) {}

  int n_;
  Convention convention_;
  std::vector<double> values_;
};

/// Boundary values and outward normal derivatives at a domain's boundary nodes.
struct BoundaryTrace {
  std::vector<std::size_t> nodes;  ///< node indices in the owning domain
  std::vector<double> values;
  std::vector<double> normal_derivative;

  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

}  // namespace curvrig
