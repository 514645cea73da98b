#pragma once

#include <Eigen/SparseCore>
#include <span>
#include <vector>

#include "curvrig/domain.hpp"
#include "curvrig/fields.hpp"

namespace curvrig {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric sparse matrix over all domain nodes plus the set of
/// constrained (Dirichlet) indices. The constraint is not baked in;
/// `free_block` restricts to unconstrained rows and columns.
class SparseSymmetricOperator {
 public:
  SparseSymmetricOperator() = default;
  SparseSymmetricOperator(SparseMatrix matrix, std::vector<std::size_t> constrained);

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  [[nodiscard]] const SparseMatrix& matrix() const noexcept { return matrix_; }
  [[nodiscard]] const std::vector<std::size_t>& constrained() const noexcept { return constrained_; }

  /// Indices of unconstrained nodes, in increasing order.
  [[nodiscard]] const std::vector<std::size_t>& free_indices() const noexcept { return free_; }
  [[nodiscard]] SparseMatrix free_block() const;

  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
  /// xᵀ A y
  [[nodiscard]] double form(std::span<const double> x, std::span<const double> y) const;

 private:
  SparseMatrix matrix_;
  std::vector<std::size_t> constrained_;
  std::vector<std::size_t> free_;
};

/// K realizes ∫ ∇u·∇v dV_ḡ, M realizes ∫ u v dV_ḡ.
struct AssembledOperators {
  SparseSymmetricOperator stiffness;
  SparseSymmetricOperator mass;
};

/// Radial domains: self-adjoint finite volumes, flux ρ(r_{i+½})(u_{i+1}-u_i)/h,
/// diagonal mass equal to the quadrature weights. Meshes: P1 elements with
/// the exact (consistent) element mass.
AssembledOperators assemble(const DiscreteDomain& domain);

/// Σ wᵢ |fᵢ|^p, the discrete ∫|f|^p dV.
double integrate_power(const FieldOnDomain& field, double p, const DiscreteDomain& domain);

/// Outward normal derivative at the Dirichlet boundary nodes.
///
/// Radial: one-sided second-order differences. Mesh: variational flux, the
/// stiffness row residual divided by the lumped boundary measure.
BoundaryTrace normal_derivative(const FieldOnDomain& field, const DiscreteDomain& domain);

enum class LaplacianScheme {
  variational,  ///< -M_L^{-1} K u, consistent with the assembled operators
  high_order,   ///< fourth-order pointwise stencil (radial domains only)
};

/// Nodal Laplacian Δu (Δ = div∘grad). At Dirichlet nodes the value is
/// extrapolated from the interior and should not be relied upon.
ScalarField laplacian(const FieldOnDomain& field, const DiscreteDomain& domain,
                      LaplacianScheme scheme = LaplacianScheme::variational);

/// Nodal ∇a·∇b. Radial: central differences (zero at a regular pole).
/// Mesh: volume-weighted vertex average of P1 cell gradients.
ScalarField gradient_dot(const FieldOnDomain& a, const FieldOnDomain& b,
                         const DiscreteDomain& domain);

/// Gershgorin bound on the largest eigenvalue of M_L^{-1} K; sets the
/// round-off floor of residual tests.
double stiffness_spectral_bound(const AssembledOperators& ops, const DiscreteDomain& domain);

}  // namespace curvrig
