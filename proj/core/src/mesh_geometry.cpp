#include "mesh_geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "curvrig/errors.hpp"

namespace curvrig::detail {
namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double facet_measure(const Mesh& mesh, const std::vector<std::size_t>& f) {
  const int d = mesh.dim;
  if (d == 1) return 1.0;
  const auto p0 = mesh.vertex(f[0]);
  const auto p1 = mesh.vertex(f[1]);
  if (d == 2) return std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
  const auto p2 = mesh.vertex(f[2]);
  const Eigen::Vector3d a(p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]);
  const Eigen::Vector3d b(p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]);
  return 0.5 * a.cross(b).norm();
}

}  // namespace

CellGeometry cell_geometry(const Mesh& mesh, std::size_t cell) {
  const int d = mesh.dim;
  const auto verts = mesh.cell(cell);
  Eigen::MatrixXd jac(d, d);
  const auto x0 = mesh.vertex(verts[0]);
  double scale = 0.0;
  for (int k = 0; k < d; ++k) {
    const auto xk = mesh.vertex(verts[k + 1]);
    for (int r = 0; r < d; ++r) {
      jac(r, k) = xk[r] - x0[r];
      scale = std::max(scale, std::abs(jac(r, k)));
    }
  }
  const double det = jac.determinant();
  if (!(std::abs(det) > 1e-12 * std::pow(scale, d))) {
    throw AssemblyError("degenerate cell " + std::to_string(cell), cell);
  }
  CellGeometry g;
  g.volume = std::abs(det) / factorial(d);
  // Rows of J^{-1} are the gradients of barycentric coordinates 1..d.
  const Eigen::MatrixXd inv = jac.inverse();
  g.gradients.assign(static_cast<std::size_t>((d + 1) * d), 0.0);
  for (int k = 0; k < d; ++k) {
    for (int r = 0; r < d; ++r) {
      g.gradients[(k + 1) * d + r] = inv(k, r);
      g.gradients[r] -= inv(k, r);
    }
  }
  return g;
}

std::vector<Facet> boundary_facets(const Mesh& mesh) {
  const int d = mesh.dim;
  std::map<std::vector<std::size_t>, int> count;
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const auto verts = mesh.cell(c);
    for (int skip = 0; skip <= d; ++skip) {
      std::vector<std::size_t> f;
      for (int k = 0; k <= d; ++k) {
        if (k != skip) f.push_back(verts[k]);
      }
      std::sort(f.begin(), f.end());
      ++count[f];
    }
  }
  std::vector<Facet> out;
  for (const auto& [f, c] : count) {
    if (c == 1) out.push_back({f, facet_measure(mesh, f)});
  }
  return out;
}

}  // namespace curvrig::detail
