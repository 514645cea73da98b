#include "curvrig/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>

#include "curvrig/errors.hpp"
#include "mesh_geometry.hpp"

namespace curvrig {
namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGaussX = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                           0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussW = {0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

double integrate_density(RadialGeometry g, int n, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double s = 0.0;
  for (std::size_t k = 0; k < kGaussX.size(); ++k) {
    s += kGaussW[k] * radial_density(g, n, mid + half * kGaussX[k]);
  }
  return s * half;
}

double angular_factor(RadialGeometry g, int n) {
  return g == RadialGeometry::interval ? 1.0 : unit_sphere_area(n - 1);
}

// ∫_0^θ sin^k
double sine_power_integral(int k, double theta) {
  if (k == 0) return theta;
  if (k == 1) return 1.0 - std::cos(theta);
  return -std::pow(std::sin(theta), k - 1) * std::cos(theta) / k +
         (k - 1.0) / k * sine_power_integral(k - 2, theta);
}

void validate(const RadialSpec& s, int n, std::size_t m) {
  const auto fail = [](const std::string& msg) { throw InputError("invalid radial domain: " + msg); };
  if (m < 16) fail("need at least 16 nodes, got " + std::to_string(m));
  if (!std::isfinite(s.inner) || !std::isfinite(s.outer)) fail("non-finite extent");
  switch (s.geometry) {
    case RadialGeometry::interval:
      if (n < 1) fail("dimension must be >= 1");
      if (!(s.inner < s.outer)) fail("interval needs a < b");
      break;
    case RadialGeometry::annulus:
      if (n < 2) fail("annulus needs n >= 2");
      if (!(s.inner > 0.0 && s.inner < s.outer)) fail("annulus needs 0 < a < b");
      break;
    case RadialGeometry::ball:
      if (n < 2) fail("ball needs n >= 2");
      if (s.inner != 0.0 || !(s.outer > 0.0)) fail("ball needs radius > 0");
      break;
    case RadialGeometry::cap:
      if (n < 2) fail("cap needs n >= 2");
      if (s.inner != 0.0 || !(s.outer > 0.0) || s.outer > std::numbers::pi / 2 + 1e-12) {
        fail("cap radius must lie in (0, pi/2]");
      }
      break;
    case RadialGeometry::sphere:
      if (n < 2) fail("sphere needs n >= 2");
      break;
  }
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

RadialSpec RadialSpec::sphere() { return {RadialGeometry::sphere, 0.0, std::numbers::pi}; }

double radial_density(RadialGeometry g, int n, double r) {
  switch (g) {
    case RadialGeometry::interval:
      return 1.0;
    case RadialGeometry::annulus:
    case RadialGeometry::ball:
      return std::pow(r, n - 1);
    case RadialGeometry::cap:
    case RadialGeometry::sphere:
      return std::pow(std::sin(r), n - 1);
  }
  return 0.0;
}

double unit_sphere_area(int k) {
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double radial_volume(const RadialSpec& s, int n) {
  const double omega = angular_factor(s.geometry, n);
  switch (s.geometry) {
    case RadialGeometry::interval:
      return s.outer - s.inner;
    case RadialGeometry::annulus:
    case RadialGeometry::ball:
      return omega * (std::pow(s.outer, n) - std::pow(s.inner, n)) / n;
    case RadialGeometry::cap:
    case RadialGeometry::sphere:
      return omega * sine_power_integral(n - 1, s.outer);
  }
  return 0.0;
}

DiscreteDomain DiscreteDomain::radial(const RadialSpec& spec, int n, std::size_t m) {
  validate(spec, n, m);
  DiscreteDomain d;
  d.kind_ = Kind::radial;
  d.n_ = n;
  d.spec_ = spec;
  d.h_ = (spec.outer - spec.inner) / static_cast<double>(m - 1);
  d.nodes_.resize(m);
  for (std::size_t i = 0; i < m; ++i) d.nodes_[i] = spec.inner + d.h_ * static_cast<double>(i);
  d.nodes_.back() = spec.outer;

  const double omega = angular_factor(spec.geometry, n);
  d.weights_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double lo = std::max(spec.inner, d.nodes_[i] - 0.5 * d.h_);
    const double hi = std::min(spec.outer, d.nodes_[i] + 0.5 * d.h_);
    d.weights_[i] = omega * integrate_density(spec.geometry, n, lo, hi);
  }

  switch (spec.geometry) {
    case RadialGeometry::interval:
    case RadialGeometry::annulus:
      d.boundary_ = {0, m - 1};
      break;
    case RadialGeometry::ball:
    case RadialGeometry::cap:
      d.boundary_ = {m - 1};
      break;
    case RadialGeometry::sphere:
      break;
  }
  d.on_boundary_.assign(m, 0);
  for (auto b : d.boundary_) d.on_boundary_[b] = 1;
  return d;
}

DiscreteDomain DiscreteDomain::from_mesh(Mesh mesh) {
  if (mesh.dim < 1 || mesh.dim > 3) throw InputError("mesh dimension must be 1, 2 or 3");
  if (mesh.coords.size() % mesh.dim != 0) throw InputError("coordinate array not a multiple of dim");
  if (mesh.cells.size() % (mesh.dim + 1) != 0) throw InputError("cell array not a multiple of dim+1");
  const std::size_t nv = mesh.vertex_count();
  if (nv == 0 || mesh.cell_count() == 0) throw InputError("mesh has no vertices or cells");
  for (auto v : mesh.cells) {
    if (v >= nv) throw InputError("cell references vertex " + std::to_string(v) + " out of range");
  }
  for (auto v : mesh.boundary) {
    if (v >= nv) throw InputError("boundary vertex " + std::to_string(v) + " out of range");
  }

  DiscreteDomain d;
  d.kind_ = Kind::mesh;
  d.n_ = mesh.dim;
  d.on_boundary_.assign(nv, 0);
  for (auto b : mesh.boundary) d.on_boundary_[b] = 1;

  for (const auto& facet : detail::boundary_facets(mesh)) {
    for (auto v : facet.vertices) {
      if (!d.on_boundary_[v]) {
        throw InputError("vertex " + std::to_string(v) + " lies on the boundary but is not marked");
      }
    }
  }

  d.weights_.assign(nv, 0.0);
  const double share = 1.0 / (mesh.dim + 1);
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const auto geom = detail::cell_geometry(mesh, c);
    for (auto v : mesh.cell(c)) d.weights_[v] += geom.volume * share;
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (!(d.weights_[v] > 0.0)) {
      throw InputError("vertex " + std::to_string(v) + " belongs to no cell");
    }
    if (d.on_boundary_[v]) d.boundary_.push_back(v);
  }
  d.mesh_ = std::move(mesh);
  return d;
}

const RadialSpec& DiscreteDomain::radial_spec() const {
  if (!is_radial()) throw InputError("domain is not radial");
  return spec_;
}

std::span<const double> DiscreteDomain::coordinates() const {
  if (!is_radial()) throw InputError("domain is not radial");
  return nodes_;
}

double DiscreteDomain::spacing() const {
  if (!is_radial()) throw InputError("domain is not radial");
  return h_;
}

const Mesh& DiscreteDomain::mesh() const {
  if (is_radial()) throw InputError("domain is not a mesh");
  return mesh_;
}

double DiscreteDomain::volume() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

std::vector<std::size_t> DiscreteDomain::interior_nodes() const {
  std::vector<std::size_t> out;
  out.reserve(size() - boundary_.size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (!on_boundary_[i]) out.push_back(i);
  }
  return out;
}

double DiscreteDomain::radial_normal_sign(std::size_t node) const {
  if (!is_radial()) throw InputError("domain is not radial");
  if (node == size() - 1) return 1.0;
  if (node == 0) return -1.0;
  throw InputError("node " + std::to_string(node) + " is not a radial end point");
}

std::string DiscreteDomain::descriptor() const {
  if (!is_radial()) {
    return "mesh(d=" + std::to_string(n_) + ",v=" + std::to_string(size()) +
           ",c=" + std::to_string(mesh_.cell_count()) + ")";
  }
  std::string g;
  switch (spec_.geometry) {
    case RadialGeometry::interval:
      g = "interval(" + format_real(spec_.inner) + ";" + format_real(spec_.outer) + ")";
      break;
    case RadialGeometry::annulus:
      g = "annulus(" + format_real(spec_.inner) + ";" + format_real(spec_.outer) + ")";
      break;
    case RadialGeometry::ball:
      g = "ball(" + format_real(spec_.outer) + ")";
      break;
    case RadialGeometry::cap:
      g = "cap(" + format_real(spec_.outer) + ")";
      break;
    case RadialGeometry::sphere:
      g = "sphere";
      break;
  }
  return g + "/n=" + std::to_string(n_) + "/m=" + std::to_string(size());
}

Mesh unit_square_mesh(std::size_t k) {
  if (k < 1) throw InputError("unit_square_mesh needs k >= 1");
  Mesh m;
  m.dim = 2;
  const auto id = [k](std::size_t i, std::size_t j) { return j * (k + 1) + i; };
  for (std::size_t j = 0; j <= k; ++j) {
    for (std::size_t i = 0; i <= k; ++i) {
      m.coords.push_back(static_cast<double>(i) / k);
      m.coords.push_back(static_cast<double>(j) / k);
      if (i == 0 || j == 0 || i == k || j == k) m.boundary.push_back(id(i, j));
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      m.cells.insert(m.cells.end(), {id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.cells.insert(m.cells.end(), {id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return m;
}

Mesh unit_cube_mesh(std::size_t k) {
  if (k < 1) throw InputError("unit_cube_mesh needs k >= 1");
  Mesh m;
  m.dim = 3;
  const auto id = [k](std::size_t i, std::size_t j, std::size_t l) {
    return (l * (k + 1) + j) * (k + 1) + i;
  };
  for (std::size_t l = 0; l <= k; ++l) {
    for (std::size_t j = 0; j <= k; ++j) {
      for (std::size_t i = 0; i <= k; ++i) {
        m.coords.insert(m.coords.end(), {static_cast<double>(i) / k, static_cast<double>(j) / k,
                                         static_cast<double>(l) / k});
        if (i == 0 || j == 0 || l == 0 || i == k || j == k || l == k) {
          m.boundary.push_back(id(i, j, l));
        }
      }
    }
  }
  std::array<int, 3> axes = {0, 1, 2};
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < k; ++i) {
        std::array<int, 3> perm = axes;
        do {
          std::array<std::size_t, 3> p = {i, j, l};
          m.cells.push_back(id(p[0], p[1], p[2]));
          for (int axis : perm) {
            ++p[axis];
            m.cells.push_back(id(p[0], p[1], p[2]));
          }
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
    }
  }
  return m;
}

Mesh disk_mesh(double radius, std::size_t rings) {
  if (!(radius > 0.0) || rings < 1) throw InputError("disk_mesh needs radius > 0 and rings >= 1");
  Mesh m;
  m.dim = 2;
  m.coords = {0.0, 0.0};
  std::vector<std::size_t> ring_start = {0};
  std::vector<std::size_t> ring_size = {1};
  for (std::size_t j = 1; j <= rings; ++j) {
    ring_start.push_back(m.vertex_count());
    ring_size.push_back(6 * j);
    const double r = radius * static_cast<double>(j) / rings;
    for (std::size_t t = 0; t < 6 * j; ++t) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(t) / (6.0 * j);
      m.coords.push_back(r * std::cos(a));
      m.coords.push_back(r * std::sin(a));
      if (j == rings) m.boundary.push_back(m.vertex_count() - 1);
    }
  }
  for (std::size_t t = 0; t < 6; ++t) {
    m.cells.insert(m.cells.end(), {0, ring_start[1] + t, ring_start[1] + (t + 1) % 6});
  }
  for (std::size_t j = 2; j <= rings; ++j) {
    const std::size_t ni = ring_size[j - 1];
    const std::size_t no = ring_size[j];
    const auto in = [&](std::size_t t) { return ring_start[j - 1] + t % ni; };
    const auto out = [&](std::size_t t) { return ring_start[j] + t % no; };
    std::size_t i = 0;
    std::size_t o = 0;
    while (i < ni || o < no) {
      const double next_in = static_cast<double>(i + 1) / ni;
      const double next_out = static_cast<double>(o + 1) / no;
      if (i < ni && (o == no || next_in < next_out)) {
        m.cells.insert(m.cells.end(), {in(i), in(i + 1), out(o)});
        ++i;
      } else {
        m.cells.insert(m.cells.end(), {in(i), out(o), out(o + 1)});
        ++o;
      }
    }
  }
  return m;
}

}  // namespace curvrig
