#include "curvrig/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "curvrig/errors.hpp"
#include "mesh_geometry.hpp"

namespace curvrig {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void require_size(const FieldOnDomain& f, const DiscreteDomain& d, const char* op) {
  if (f.size() != d.size()) {
    throw InputError(std::string(op) + ": field has " + std::to_string(f.size()) +
                     " values, domain has " + std::to_string(d.size()) + " nodes");
  }
}

bool regular_at_start(RadialGeometry g) {
  return g == RadialGeometry::ball || g == RadialGeometry::cap || g == RadialGeometry::sphere;
}

bool regular_at_end(RadialGeometry g) { return g == RadialGeometry::sphere; }

// ρ'/ρ for the radial Laplacian u'' + (ρ'/ρ) u'.
double log_density_slope(RadialGeometry g, int n, double r) {
  switch (g) {
    case RadialGeometry::interval:
      return 0.0;
    case RadialGeometry::annulus:
    case RadialGeometry::ball:
      return (n - 1) / r;
    case RadialGeometry::cap:
    case RadialGeometry::sphere:
      return (n - 1) * std::cos(r) / std::sin(r);
  }
  return 0.0;
}

AssembledOperators assemble_radial(const DiscreteDomain& d) {
  const auto r = d.coordinates();
  const auto& spec = d.radial_spec();
  const std::size_t m = d.size();
  const double h = d.spacing();
  const double omega = spec.geometry == RadialGeometry::interval
                           ? 1.0
                           : unit_sphere_area(d.dimension() - 1);
  Triplets k;
  k.reserve(4 * m);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double c = omega * radial_density(spec.geometry, d.dimension(), r[i] + 0.5 * h) / h;
    k.emplace_back(i, i, c);
    k.emplace_back(i + 1, i + 1, c);
    k.emplace_back(i, i + 1, -c);
    k.emplace_back(i + 1, i, -c);
  }
  Triplets mass;
  mass.reserve(m);
  const auto w = d.weights();
  for (std::size_t i = 0; i < m; ++i) mass.emplace_back(i, i, w[i]);

  SparseMatrix K(m, m);
  K.setFromTriplets(k.begin(), k.end());
  SparseMatrix M(m, m);
  M.setFromTriplets(mass.begin(), mass.end());
  return {SparseSymmetricOperator(std::move(K), d.boundary_nodes()),
          SparseSymmetricOperator(std::move(M), d.boundary_nodes())};
}

AssembledOperators assemble_mesh(const DiscreteDomain& d) {
  const Mesh& mesh = d.mesh();
  const int dim = mesh.dim;
  const int nloc = dim + 1;
  Triplets k;
  Triplets mass;
  k.reserve(mesh.cell_count() * nloc * nloc);
  mass.reserve(mesh.cell_count() * nloc * nloc);
  const double mass_scale = 1.0 / ((dim + 1) * (dim + 2));
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const auto g = detail::cell_geometry(mesh, c);
    const auto verts = mesh.cell(c);
    for (int a = 0; a < nloc; ++a) {
      for (int b = 0; b < nloc; ++b) {
        double dot = 0.0;
        for (int x = 0; x < dim; ++x) dot += g.gradients[a * dim + x] * g.gradients[b * dim + x];
        k.emplace_back(verts[a], verts[b], g.volume * dot);
        mass.emplace_back(verts[a], verts[b], g.volume * mass_scale * (a == b ? 2.0 : 1.0));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(d.size());
  SparseMatrix K(n, n);
  K.setFromTriplets(k.begin(), k.end());
  SparseMatrix M(n, n);
  M.setFromTriplets(mass.begin(), mass.end());
  return {SparseSymmetricOperator(std::move(K), d.boundary_nodes()),
          SparseSymmetricOperator(std::move(M), d.boundary_nodes())};
}

// Fourth-order first and second derivatives at node i of a uniform grid,
// reflecting evenly across regular poles and switching to one-sided
// stencils near ordinary end points.
struct Derivatives {
  double d1;
  double d2;
};

Derivatives radial_derivatives(std::span<const double> u, std::size_t i, double h,
                               bool reflect_start, bool reflect_end) {
  const auto m = static_cast<std::ptrdiff_t>(u.size());
  const auto at = [&](std::ptrdiff_t j) {
    if (j < 0 && reflect_start) j = -j;
    if (j >= m && reflect_end) j = 2 * (m - 1) - j;
    return u[static_cast<std::size_t>(j)];
  };
  const auto ii = static_cast<std::ptrdiff_t>(i);
  const bool near_start = !reflect_start && ii < 2;
  const bool near_end = !reflect_end && ii > m - 3;
  if (!near_start && !near_end) {
    const double d1 = (-at(ii + 2) + 8.0 * at(ii + 1) - 8.0 * at(ii - 1) + at(ii - 2)) / (12.0 * h);
    const double d2 =
        (-at(ii + 2) + 16.0 * at(ii + 1) - 30.0 * at(ii) + 16.0 * at(ii - 1) - at(ii - 2)) /
        (12.0 * h * h);
    return {d1, d2};
  }
  // One-sided stencils written for the start; mirrored (s = -1) for the end.
  const double s = near_start ? 1.0 : -1.0;
  const std::ptrdiff_t base = near_start ? 0 : m - 1;
  const std::ptrdiff_t offset = near_start ? ii : m - 1 - ii;
  const auto v = [&](std::ptrdiff_t k) { return u[static_cast<std::size_t>(base + static_cast<std::ptrdiff_t>(s) * k)]; };
  double d1 = 0.0;
  double d2 = 0.0;
  if (offset == 0) {
    d1 = (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4)) / (12.0 * h);
    d2 = (45.0 * v(0) - 154.0 * v(1) + 214.0 * v(2) - 156.0 * v(3) + 61.0 * v(4) - 10.0 * v(5)) /
         (12.0 * h * h);
  } else {
    d1 = (-3.0 * v(0) - 10.0 * v(1) + 18.0 * v(2) - 6.0 * v(3) + v(4)) / (12.0 * h);
    d2 = (10.0 * v(0) - 15.0 * v(1) - 4.0 * v(2) + 14.0 * v(3) - 6.0 * v(4) + v(5)) / (12.0 * h * h);
  }
  return {s * d1, d2};
}

ScalarField high_order_laplacian(const FieldOnDomain& f, const DiscreteDomain& d) {
  const auto& spec = d.radial_spec();
  const auto r = d.coordinates();
  const std::size_t m = d.size();
  const bool rs = regular_at_start(spec.geometry);
  const bool re = regular_at_end(spec.geometry);
  ScalarField out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto der = radial_derivatives(f.values, i, d.spacing(), rs, re);
    if ((i == 0 && rs) || (i == m - 1 && re)) {
      out[i] = d.dimension() * der.d2;  // regular pole: Δu = n u''
    } else {
      out[i] = der.d2 + log_density_slope(spec.geometry, d.dimension(), r[i]) * der.d1;
    }
  }
  return out;
}

}  // namespace

SparseSymmetricOperator::SparseSymmetricOperator(SparseMatrix matrix,
                                                 std::vector<std::size_t> constrained)
    : matrix_(std::move(matrix)), constrained_(std::move(constrained)) {
  matrix_.makeCompressed();
  std::vector<char> fixed(size(), 0);
  for (auto c : constrained_) fixed[c] = 1;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!fixed[i]) free_.push_back(i);
  }
}

SparseMatrix SparseSymmetricOperator::free_block() const {
  std::vector<Eigen::Index> map(size(), -1);
  for (std::size_t k = 0; k < free_.size(); ++k) map[free_[k]] = static_cast<Eigen::Index>(k);
  Triplets t;
  t.reserve(static_cast<std::size_t>(matrix_.nonZeros()));
  for (Eigen::Index col = 0; col < matrix_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix_, col); it; ++it) {
      const auto i = map[static_cast<std::size_t>(it.row())];
      const auto j = map[static_cast<std::size_t>(it.col())];
      if (i >= 0 && j >= 0) t.emplace_back(i, j, it.value());
    }
  }
  const auto nf = static_cast<Eigen::Index>(free_.size());
  SparseMatrix out(nf, nf);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

std::vector<double> SparseSymmetricOperator::apply(std::span<const double> x) const {
  if (x.size() != size()) throw InputError("operator apply: size mismatch");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd y = matrix_ * xv;
  return {y.data(), y.data() + y.size()};
}

double SparseSymmetricOperator::form(std::span<const double> x, std::span<const double> y) const {
  const auto ax = apply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) s += ax[i] * y[i];
  return s;
}

AssembledOperators assemble(const DiscreteDomain& domain) {
  return domain.is_radial() ? assemble_radial(domain) : assemble_mesh(domain);
}

double integrate_power(const FieldOnDomain& field, double p, const DiscreteDomain& domain) {
  require_size(field, domain, "integrate_power");
  if (!(p >= 1.0)) throw InputError("integrate_power needs p >= 1");
  const auto w = domain.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += w[i] * std::pow(std::abs(field[i]), p);
  return s;
}

BoundaryTrace normal_derivative(const FieldOnDomain& field, const DiscreteDomain& domain) {
  require_size(field, domain, "normal_derivative");
  BoundaryTrace out;
  out.nodes = domain.boundary_nodes();
  out.values.reserve(out.nodes.size());
  out.normal_derivative.reserve(out.nodes.size());

  if (domain.is_radial()) {
    const double h = domain.spacing();
    const auto& u = field.values;
    const std::size_t m = u.size();
    for (auto b : out.nodes) {
      double du = 0.0;
      if (b == m - 1) {
        du = (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) / (2.0 * h);
      } else {
        du = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
      }
      out.values.push_back(u[b]);
      out.normal_derivative.push_back(domain.radial_normal_sign(b) * du);
    }
    return out;
  }

  const Mesh& mesh = domain.mesh();
  std::vector<double> boundary_measure(domain.size(), 0.0);
  for (const auto& f : detail::boundary_facets(mesh)) {
    for (auto v : f.vertices) boundary_measure[v] += f.measure / static_cast<double>(f.vertices.size());
  }
  const auto ops = assemble(domain);
  const auto ku = ops.stiffness.apply(field.values);
  for (auto b : out.nodes) {
    out.values.push_back(field[b]);
    out.normal_derivative.push_back(boundary_measure[b] > 0.0 ? ku[b] / boundary_measure[b] : 0.0);
  }
  return out;
}

ScalarField laplacian(const FieldOnDomain& field, const DiscreteDomain& domain,
                      LaplacianScheme scheme) {
  require_size(field, domain, "laplacian");
  if (scheme == LaplacianScheme::high_order) {
    if (!domain.is_radial()) throw InputError("high-order Laplacian is available on radial domains only");
    return high_order_laplacian(field, domain);
  }
  const auto ops = assemble(domain);
  const auto ku = ops.stiffness.apply(field.values);
  const auto w = domain.weights();
  ScalarField out(field.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -ku[i] / w[i];

  if (domain.is_radial()) {
    const std::size_t m = out.size();
    for (auto b : domain.boundary_nodes()) {
      if (b == m - 1) {
        out[b] = 3.0 * out[m - 2] - 3.0 * out[m - 3] + out[m - 4];
      } else {
        out[b] = 3.0 * out[1] - 3.0 * out[2] + out[3];
      }
    }
  }
  return out;
}

ScalarField gradient_dot(const FieldOnDomain& a, const FieldOnDomain& b,
                         const DiscreteDomain& domain) {
  require_size(a, domain, "gradient_dot");
  require_size(b, domain, "gradient_dot");
  ScalarField out(a.size(), 0.0);
  if (domain.is_radial()) {
    const auto g = domain.radial_spec().geometry;
    const double h = domain.spacing();
    const std::size_t m = a.size();
    const auto deriv = [&](const std::vector<double>& u, std::size_t i) {
      if (i == 0) {
        return regular_at_start(g) ? 0.0 : (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
      }
      if (i == m - 1) {
        return regular_at_end(g) ? 0.0 : (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) / (2.0 * h);
      }
      return (u[i + 1] - u[i - 1]) / (2.0 * h);
    };
    for (std::size_t i = 0; i < m; ++i) out[i] = deriv(a.values, i) * deriv(b.values, i);
    return out;
  }

  const Mesh& mesh = domain.mesh();
  const int dim = mesh.dim;
  std::vector<double> ga(a.size() * dim, 0.0);
  std::vector<double> gb(b.size() * dim, 0.0);
  std::vector<double> vol(a.size(), 0.0);
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const auto geom = detail::cell_geometry(mesh, c);
    const auto verts = mesh.cell(c);
    std::vector<double> ca(dim, 0.0);
    std::vector<double> cb(dim, 0.0);
    for (int k = 0; k <= dim; ++k) {
      for (int x = 0; x < dim; ++x) {
        ca[x] += a[verts[k]] * geom.gradients[k * dim + x];
        cb[x] += b[verts[k]] * geom.gradients[k * dim + x];
      }
    }
    for (auto v : verts) {
      vol[v] += geom.volume;
      for (int x = 0; x < dim; ++x) {
        ga[v * dim + x] += geom.volume * ca[x];
        gb[v * dim + x] += geom.volume * cb[x];
      }
    }
  }
  for (std::size_t v = 0; v < out.size(); ++v) {
    double s = 0.0;
    for (int x = 0; x < dim; ++x) s += ga[v * dim + x] * gb[v * dim + x];
    out[v] = s / (vol[v] * vol[v]);
  }
  return out;
}

double stiffness_spectral_bound(const AssembledOperators& ops, const DiscreteDomain& domain) {
  const auto& K = ops.stiffness.matrix();
  const auto w = domain.weights();
  std::vector<double> rowsum(domain.size(), 0.0);
  for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      rowsum[static_cast<std::size_t>(it.row())] += std::abs(it.value());
    }
  }
  double bound = 0.0;
  for (std::size_t i = 0; i < rowsum.size(); ++i) bound = std::max(bound, rowsum[i] / w[i]);
  return bound;
}

}  // namespace curvrig
