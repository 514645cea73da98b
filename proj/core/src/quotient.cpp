#include "curvrig/quotient.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "curvrig/errors.hpp"
#include "curvrig/operators.hpp"
#include "curvrig/spectral.hpp"
#include "p1_quadrature.hpp"

namespace curvrig {
namespace {

void require_dimension(int n) {
  if (n < 3) throw UnsupportedDimension("Yamabe quotient requires n >= 3, got " + std::to_string(n));
}

double conformal_coefficient(int n) { return (n - 2.0) / (4.0 * (n - 1.0)); }

// Functional pieces on the free-node vector, evaluated exactly for the P1
// interpolant (boundary values zero).
class SubcriticalProblem {
 public:
  SubcriticalProblem(const DiscreteDomain& domain, const ScalarField& R_bar)
      : model_(detail::p1_model(domain)), slot_(domain.size(), -1) {
    for (std::size_t i = 0; i < domain.size(); ++i) {
      if (!domain.is_boundary(i)) {
        slot_[i] = static_cast<Eigen::Index>(free_.size());
        free_.push_back(i);
      }
    }
    const auto nf = static_cast<Eigen::Index>(free_.size());
    const double c = conformal_coefficient(domain.dimension());

    std::vector<Eigen::Triplet<double>> t;
    for (int col = 0; col < model_.stiffness.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(model_.stiffness, col); it; ++it) {
        const auto i = slot_[static_cast<std::size_t>(it.row())];
        const auto j = slot_[static_cast<std::size_t>(col)];
        if (i >= 0 && j >= 0) t.emplace_back(i, j, it.value());
      }
    }
    SparseMatrix K(nf, nf);
    K.setFromTriplets(t.begin(), t.end());
    for (const auto& q : model_.points) {
      double R = 0.0;
      for (int a = 0; a < q.count; ++a) R += q.shape[a] * R_bar[q.nodes[a]];
      for (int a = 0; a < q.count; ++a) {
        const auto i = slot_[q.nodes[a]];
        if (i < 0) continue;
        for (int b = 0; b < q.count; ++b) {
          const auto j = slot_[q.nodes[b]];
          if (j >= 0) t.emplace_back(i, j, c * q.weight * R * q.shape[a] * q.shape[b]);
        }
      }
    }
    energy_.resize(nf, nf);
    energy_.setFromTriplets(t.begin(), t.end());

    const auto w = domain.weights();
    SparseMatrix metric = K;
    for (Eigen::Index k = 0; k < nf; ++k) metric.coeffRef(k, k) += w[free_[static_cast<std::size_t>(k)]];
    metric_.compute(metric);
    if (metric_.info() != Eigen::Success) throw SolverError("estimate_Q: H1 metric factorization failed");
  }

  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(free_.size()); }
  [[nodiscard]] const std::vector<std::size_t>& free() const { return free_; }

  [[nodiscard]] double at(const Eigen::VectorXd& u, const detail::QuadraturePoint& q) const {
    double v = 0.0;
    for (int a = 0; a < q.count; ++a) {
      const auto i = slot_[q.nodes[a]];
      if (i >= 0) v += q.shape[a] * u[i];
    }
    return v;
  }

  [[nodiscard]] double power_sum(const Eigen::VectorXd& u, double p) const {
    double s = 0.0;
    for (const auto& q : model_.points) s += q.weight * std::pow(std::abs(at(u, q)), p);
    return s;
  }

  [[nodiscard]] double value(const Eigen::VectorXd& u, double p) const {
    return u.dot(energy_ * u) / std::pow(power_sum(u, p), 2.0 / p);
  }

  [[nodiscard]] Eigen::VectorXd gradient(const Eigen::VectorXd& u, double p, double J) const {
    const double s = power_sum(u, p);
    const double norm = std::pow(s, 2.0 / p);
    const double f = 2.0 * std::pow(s, 2.0 / p - 1.0);
    Eigen::VectorXd dn = Eigen::VectorXd::Zero(u.size());
    for (const auto& q : model_.points) {
      const double v = at(u, q);
      const double g = f * q.weight * std::pow(std::abs(v), p - 2.0) * v;
      for (int a = 0; a < q.count; ++a) {
        const auto i = slot_[q.nodes[a]];
        if (i >= 0) dn[i] += g * q.shape[a];
      }
    }
    return (2.0 * (energy_ * u) - J * dn) / norm;
  }

  [[nodiscard]] Eigen::VectorXd precondition(const Eigen::VectorXd& g) const { return metric_.solve(g); }

  void normalize(Eigen::VectorXd& u, double p) const { u /= std::pow(power_sum(u, p), 1.0 / p); }

 private:
  detail::P1Model model_;
  std::vector<Eigen::Index> slot_;
  std::vector<std::size_t> free_;
  SparseMatrix energy_;
  Eigen::SimplicialLDLT<SparseMatrix> metric_;
};

struct DescentResult {
  double value;
  int iterations;
};

DescentResult minimize(const SubcriticalProblem& prob, Eigen::VectorXd& u, double p,
                       const QuotientParams& params) {
  prob.normalize(u, p);
  double J = prob.value(u, p);
  double step = 1.0;
  int it = 0;
  for (; it < params.max_iterations; ++it) {
    if (!std::isfinite(J)) throw SolverError("estimate_Q: functional diverged");
    const Eigen::VectorXd dir = -prob.precondition(prob.gradient(u, p, J));
    double trial_step = std::min(1.0, 2.0 * step);
    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_value = J;
    for (int halving = 0; halving < 60; ++halving, trial_step *= 0.5) {
      trial = u + trial_step * dir;
      trial_value = prob.value(trial, p);
      if (std::isfinite(trial_value) && trial_value < J) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no decrease representable: stationary to round-off
    step = trial_step;
    prob.normalize(trial, p);
    u = std::move(trial);
    const double change = std::abs(J - trial_value) / std::max(std::abs(trial_value), 1e-300);
    J = trial_value;
    if (change < params.relative_tolerance) {
      ++it;
      break;
    }
  }
  return {J, it};
}

}  // namespace

double sphere_yamabe_constant(int n) {
  require_dimension(n);
  return n * (n - 2.0) / 4.0 * std::pow(unit_sphere_area(n), 2.0 / n);
}

double einstein_quotient(int n, double R, double vol) {
  require_dimension(n);
  if (!(R > 0.0) || !(vol > 0.0) || !std::isfinite(R) || !std::isfinite(vol)) {
    throw InputError("einstein_quotient needs R > 0 and vol > 0");
  }
  return conformal_coefficient(n) * R * std::pow(vol, 2.0 / n);
}

double critical_exponent(int n) {
  require_dimension(n);
  return 2.0 * n / (n - 2.0);
}

double yamabe_functional(const FieldOnDomain& u, const DiscreteDomain& domain,
                         const ScalarField& R_bar, double p) {
  require_dimension(domain.dimension());
  if (u.size() != domain.size() || R_bar.size() != domain.size()) {
    throw InputError("yamabe_functional: size mismatch");
  }
  if (!(p >= 1.0)) throw InputError("yamabe_functional: p must be >= 1");
  const auto model = detail::p1_model(domain);
  const double c = conformal_coefficient(domain.dimension());
  const Eigen::Map<const Eigen::VectorXd> uv(u.values.data(), static_cast<Eigen::Index>(u.size()));
  double energy = uv.dot(model.stiffness * uv);
  double s = 0.0;
  for (const auto& q : model.points) {
    double v = 0.0;
    double R = 0.0;
    for (int a = 0; a < q.count; ++a) {
      v += q.shape[a] * u[q.nodes[a]];
      R += q.shape[a] * R_bar[q.nodes[a]];
    }
    energy += c * q.weight * R * v * v;
    s += q.weight * std::pow(std::abs(v), p);
  }
  if (!(s > 0.0)) throw InputError("yamabe_functional: zero field");
  return energy / std::pow(s, 2.0 / p);
}

FieldOnDomain bubble_test_field(const DiscreteDomain& domain, double scale) {
  const int n = domain.dimension();
  const auto profile = [n](double r, double mu) {
    return std::pow(1.0 + (r / mu) * (r / mu), -(n - 2.0) / 2.0);
  };
  FieldOnDomain out(domain.size(), 0.0);
  if (domain.is_radial()) {
    const auto& spec = domain.radial_spec();
    const auto r = domain.coordinates();
    if (!domain.has_boundary()) {
      out.values.assign(domain.size(), 1.0);
      return out;
    }
    double center = 0.0;
    double extent = spec.outer;
    if (spec.geometry == RadialGeometry::annulus || spec.geometry == RadialGeometry::interval) {
      center = 0.5 * (spec.inner + spec.outer);
      extent = 0.5 * (spec.outer - spec.inner);
    }
    const double mu = scale * extent;
    const double cut = profile(extent, mu);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = std::max(0.0, profile(std::abs(r[i] - center), mu) - cut);
    }
    for (auto b : domain.boundary_nodes()) out[b] = 0.0;
    return out;
  }
  const Mesh& mesh = domain.mesh();
  std::vector<double> c(mesh.dim, 0.0);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    for (int x = 0; x < mesh.dim; ++x) c[x] += mesh.vertex(v)[x] / mesh.vertex_count();
  }
  std::vector<double> dist(mesh.vertex_count());
  double extent = 0.0;
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    double s = 0.0;
    for (int x = 0; x < mesh.dim; ++x) s += (mesh.vertex(v)[x] - c[x]) * (mesh.vertex(v)[x] - c[x]);
    dist[v] = std::sqrt(s);
    extent = std::max(extent, dist[v]);
  }
  const double mu = scale * extent;
  double cut = 0.0;
  for (auto b : domain.boundary_nodes()) cut = std::max(cut, profile(dist[b], mu));
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = std::max(0.0, profile(dist[v], mu) - cut);
  for (auto b : domain.boundary_nodes()) out[b] = 0.0;
  return out;
}

QuotientEstimate estimate_Q(const DiscreteDomain& domain, const ScalarField& R_bar,
                            const QuotientParams& params) {
  const int n = domain.dimension();
  require_dimension(n);
  if (R_bar.size() != domain.size()) throw InputError("estimate_Q: curvature field size mismatch");
  if (domain.is_radial()) {
    const auto g = domain.radial_spec().geometry;
    if (g == RadialGeometry::annulus || g == RadialGeometry::interval) {
      throw InputError("estimate_Q: radial grids represent only radial fields; the quotient of " +
                       domain.descriptor() + " needs a mesh");
    }
  }
  if (params.epsilons.empty()) throw InputError("estimate_Q: empty continuation schedule");
  const double p_crit = critical_exponent(n);
  for (double e : params.epsilons) {
    if (!(e >= 0.0) || p_crit - e <= 2.0) throw InputError("estimate_Q: epsilon out of range");
  }

  const SubcriticalProblem prob(domain, R_bar);
  if (prob.size() == 0) throw InputError("estimate_Q: domain has no free nodes");

  FieldOnDomain start;
  if (params.start) {
    start = *params.start;
    if (start.size() != domain.size()) throw InputError("estimate_Q: start field size mismatch");
  } else if (domain.has_boundary()) {
    start = dirichlet_lambda1(domain).u1;
  } else {
    start = FieldOnDomain(domain.size(), 1.0);
  }
  Eigen::VectorXd u(prob.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = start[prob.free()[static_cast<std::size_t>(k)]];
  if (u.norm() == 0.0) throw InputError("estimate_Q: start field vanishes on free nodes");

  QuotientEstimate est;
  est.n = n;
  for (double eps : params.epsilons) {
    const auto r = minimize(prob, u, p_crit - eps, params);
    est.stages.push_back({eps, r.value, r.iterations});
  }
  const auto& last = est.stages.back();
  est.extrapolated = last.value;
  if (est.stages.size() >= 2) {
    const auto& prev = est.stages[est.stages.size() - 2];
    if (prev.epsilon != last.epsilon) {
      est.extrapolated = last.value + (last.value - prev.value) * last.epsilon / (prev.epsilon - last.epsilon);
    }
  }
  est.minimizer = FieldOnDomain(domain.size(), 0.0);
  for (Eigen::Index k = 0; k < u.size(); ++k) est.minimizer[prob.free()[static_cast<std::size_t>(k)]] = u[k];

  est.upper_bound = std::numeric_limits<double>::infinity();
  for (double s : params.bubble_scales) {
    const auto field = bubble_test_field(domain, s);
    if (integrate_power(field, p_crit, domain) > 0.0) {
      est.upper_bound = std::min(est.upper_bound, yamabe_functional(field, domain, R_bar, p_crit));
    }
  }
  est.value = std::min(est.extrapolated, est.upper_bound);
  return est;
}

}  // namespace curvrig
