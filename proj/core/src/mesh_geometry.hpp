#pragma once

#include <cstddef>
#include <vector>

#include "curvrig/domain.hpp"

namespace curvrig::detail {

struct CellGeometry {
  double volume = 0.0;
  /// Gradients of the d+1 barycentric functions, `dim` entries each.
  std::vector<double> gradients;
};

/// Throws AssemblyError for a (near-)degenerate cell.
CellGeometry cell_geometry(const Mesh& mesh, std::size_t cell);

struct Facet {
  std::vector<std::size_t> vertices;  // sorted
  double measure = 0.0;
};

/// Facets owned by exactly one cell.
std::vector<Facet> boundary_facets(const Mesh& mesh);

}  // namespace curvrig::detail
