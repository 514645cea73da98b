#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace curvrig {

enum class RadialGeometry {
  interval,  ///< [a, b] with unit weight (one-dimensional Sturm-Liouville model)
  annulus,   ///< {a < |x| < b} ⊂ Rⁿ, weight r^{n-1}
  ball,      ///< {|x| < b} ⊂ Rⁿ, weight r^{n-1}, regular at r = 0
  cap,       ///< geodesic ball of radius θ₀ ≤ π/2 on the round Sⁿ, weight sin^{n-1}θ
  sphere,    ///< the closed round Sⁿ, θ ∈ [0, π], no boundary
};

/// Geometry of a rotationally symmetric domain. For caps and spheres the
/// coordinate is geodesic distance θ from the pole.
struct RadialSpec {
  RadialGeometry geometry = RadialGeometry::interval;
  double inner = 0.0;
  double outer = 1.0;

  static RadialSpec interval(double a, double b) { return {RadialGeometry::interval, a, b}; }
  static RadialSpec annulus(double a, double b) { return {RadialGeometry::annulus, a, b}; }
  static RadialSpec ball(double b) { return {RadialGeometry::ball, 0.0, b}; }
  static RadialSpec cap(double theta0) { return {RadialGeometry::cap, 0.0, theta0}; }
  static RadialSpec sphere();
};

/// Simplicial mesh in R^dim (dim ∈ {1, 2, 3}) with flat metric.
struct Mesh {
  int dim = 2;
  std::vector<double> coords;           ///< vertex-major, `dim` entries per vertex
  std::vector<std::size_t> cells;       ///< `dim + 1` vertex indices per cell
  std::vector<std::size_t> boundary;    ///< marked boundary vertices

  [[nodiscard]] std::size_t vertex_count() const noexcept { return coords.size() / dim; }
  [[nodiscard]] std::size_t cell_count() const noexcept { return cells.size() / (dim + 1); }
  [[nodiscard]] std::span<const double> vertex(std::size_t i) const {
    return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  [[nodiscard]] std::span<const std::size_t> cell(std::size_t c) const {
    return {cells.data() + c * (dim + 1), static_cast<std::size_t>(dim + 1)};
  }
};

/// Nodes, quadrature weights (dV_ḡ) and Dirichlet boundary of a discrete domain.
///
/// Radial weights integrate the full angular factor, so Σ wᵢ is the volume of
/// the domain rather than a per-steradian quantity.
class DiscreteDomain {
 public:
  enum class Kind { radial, mesh };

  /// Uniform vertex-centred grid of m ≥ 16 nodes; each weight is the exact
  /// volume of the node's control cell.
  static DiscreteDomain radial(const RadialSpec& spec, int n, std::size_t m);
  static DiscreteDomain from_mesh(Mesh mesh);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] bool is_radial() const noexcept { return kind_ == Kind::radial; }
  [[nodiscard]] int dimension() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }

  [[nodiscard]] const RadialSpec& radial_spec() const;
  /// Radial coordinate of each node (radial domains only).
  [[nodiscard]] std::span<const double> coordinates() const;
  [[nodiscard]] double spacing() const;
  [[nodiscard]] const Mesh& mesh() const;

  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  [[nodiscard]] double volume() const noexcept;

  /// Dirichlet nodes (ordered).
  [[nodiscard]] const std::vector<std::size_t>& boundary_nodes() const noexcept { return boundary_; }
  [[nodiscard]] bool is_boundary(std::size_t i) const { return on_boundary_[i] != 0; }
  [[nodiscard]] bool has_boundary() const noexcept { return !boundary_.empty(); }
  [[nodiscard]] std::vector<std::size_t> interior_nodes() const;

  /// Outward unit normal sign for a radial boundary node: +1 at the outer
  /// end, -1 at the inner end.
  [[nodiscard]] double radial_normal_sign(std::size_t node) const;

  /// Short stable description, e.g. "cap(1.2)/n=3/m=512".
  [[nodiscard]] std::string descriptor() const;

 private:
  DiscreteDomain() = default;

  Kind kind_ = Kind::radial;
  int n_ = 1;
  RadialSpec spec_{};
  std::vector<double> nodes_;
  double h_ = 0.0;
  Mesh mesh_{};
  std::vector<double> weights_;
  std::vector<std::size_t> boundary_;
  std::vector<char> on_boundary_;
};

/// Radial density ρ(r) without the angular factor: 1, r^{n-1} or sin^{n-1}θ.
double radial_density(RadialGeometry g, int n, double r);

/// |S^{k}| = 2π^{(k+1)/2} / Γ((k+1)/2).
double unit_sphere_area(int k);

/// Closed-form volume of a radial domain (used as an oracle and for
/// descriptors).
double radial_volume(const RadialSpec& spec, int n);

/// Structured triangulation of [0,1]² with k×k squares, each cut in two.
Mesh unit_square_mesh(std::size_t k);
/// Kuhn triangulation of [0,1]³ with k³ cubes, six tetrahedra each.
Mesh unit_cube_mesh(std::size_t k);
/// Disk of the given radius built from `rings` concentric rings.
Mesh disk_mesh(double radius, std::size_t rings);

}  // namespace curvrig
