#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "curvrig/domain.hpp"
#include "curvrig/operators.hpp"

namespace curvrig::detail {

/// Quadrature point of the piecewise-linear interpolant on one cell.
struct QuadraturePoint {
  double weight = 0.0;  ///< includes the volume density
  int count = 0;        ///< number of cell vertices
  std::array<std::size_t, 4> nodes{};
  std::array<double, 4> shape{};
};

/// Exact P1 Dirichlet energy plus cell quadrature for nonlinear integrals.
/// Radial cells use 4-point Gauss-Legendre with the radial density; simplices
/// use a collapsed-coordinate Gauss rule with 3 points per direction.
struct P1Model {
  SparseMatrix stiffness;
  std::vector<QuadraturePoint> points;
};

P1Model p1_model(const DiscreteDomain& domain);

}  // namespace curvrig::detail
