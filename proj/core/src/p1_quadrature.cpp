#include "p1_quadrature.hpp"

#include <cmath>

#include "mesh_geometry.hpp"

namespace curvrig::detail {
namespace {

constexpr std::array<double, 4> kGauss4X = {-0.8611363115940526, -0.3399810435848563,
                                            0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGauss4W = {0.3478548451374538, 0.6521451548625461,
                                            0.6521451548625461, 0.3478548451374538};
constexpr std::array<double, 3> kGauss3X = {0.1127016653792583, 0.5, 0.8872983346207417};  // on [0, 1]
constexpr std::array<double, 3> kGauss3W = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

P1Model radial_model(const DiscreteDomain& d) {
  const auto& spec = d.radial_spec();
  const auto r = d.coordinates();
  const double h = d.spacing();
  const int n = d.dimension();
  const double omega = spec.geometry == RadialGeometry::interval ? 1.0 : unit_sphere_area(n - 1);
  const std::size_t m = d.size();

  P1Model model;
  model.points.reserve(4 * (m - 1));
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * m);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double mid = r[i] + 0.5 * h;
    double cell = 0.0;
    for (std::size_t q = 0; q < kGauss4X.size(); ++q) {
      const double x = mid + 0.5 * h * kGauss4X[q];
      const double wq = omega * 0.5 * h * kGauss4W[q] * radial_density(spec.geometry, n, x);
      cell += wq;
      const double s = (x - r[i]) / h;
      QuadraturePoint p;
      p.weight = wq;
      p.count = 2;
      p.nodes = {i, i + 1, 0, 0};
      p.shape = {1.0 - s, s, 0.0, 0.0};
      model.points.push_back(p);
    }
    const double c = cell / (h * h);
    t.emplace_back(i, i, c);
    t.emplace_back(i + 1, i + 1, c);
    t.emplace_back(i, i + 1, -c);
    t.emplace_back(i + 1, i, -c);
  }
  model.stiffness.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  model.stiffness.setFromTriplets(t.begin(), t.end());
  return model;
}

void simplex_rule(int dim, std::vector<std::array<double, 4>>& bary, std::vector<double>& weights) {
  // Collapsed (Duffy) coordinates over the unit cube; weights sum to 1.
  double total = 0.0;
  const auto push = [&](std::array<double, 4> b, double w) {
    bary.push_back(b);
    weights.push_back(w);
    total += w;
  };
  if (dim == 1) {
    for (std::size_t a = 0; a < 3; ++a) push({1.0 - kGauss3X[a], kGauss3X[a], 0.0, 0.0}, kGauss3W[a]);
  } else if (dim == 2) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        const double x = kGauss3X[a];
        const double y = (1.0 - x) * kGauss3X[b];
        push({1.0 - x - y, x, y, 0.0}, kGauss3W[a] * kGauss3W[b] * (1.0 - x));
      }
    }
  } else {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        for (std::size_t c = 0; c < 3; ++c) {
          const double x = kGauss3X[a];
          const double y = (1.0 - x) * kGauss3X[b];
          const double z = (1.0 - x) * (1.0 - kGauss3X[b]) * kGauss3X[c];
          push({1.0 - x - y - z, x, y, z},
               kGauss3W[a] * kGauss3W[b] * kGauss3W[c] * (1.0 - x) * (1.0 - x) * (1.0 - kGauss3X[b]));
        }
      }
    }
  }
  for (double& w : weights) w /= total;
}

P1Model mesh_model(const DiscreteDomain& d) {
  const Mesh& mesh = d.mesh();
  P1Model model;
  model.stiffness = assemble(d).stiffness.matrix();
  std::vector<std::array<double, 4>> bary;
  std::vector<double> rule;
  simplex_rule(mesh.dim, bary, rule);
  model.points.reserve(mesh.cell_count() * rule.size());
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const double vol = cell_geometry(mesh, c).volume;
    const auto verts = mesh.cell(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      QuadraturePoint p;
      p.weight = vol * rule[q];
      p.count = mesh.dim + 1;
      for (int k = 0; k <= mesh.dim; ++k) {
        p.nodes[k] = verts[k];
        p.shape[k] = bary[q][k];
      }
      model.points.push_back(p);
    }
  }
  return model;
}

}  // namespace

P1Model p1_model(const DiscreteDomain& domain) {
  return domain.is_radial() ? radial_model(domain) : mesh_model(domain);
}

}  // namespace curvrig::detail
