#include "curvrig/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "curvrig/conformal.hpp"
#include "curvrig/errors.hpp"
#include "curvrig/operators.hpp"
#include "curvrig/quotient.hpp"
#include "curvrig/spectral.hpp"

namespace curvrig {
namespace {

void validate(const BvpProblem& p) {
  const int n = p.domain.dimension();
  if (n < 3) throw UnsupportedDimension("solve_bvp requires n >= 3");
  const std::size_t N = p.domain.size();
  if (p.R_bar.size() != N || p.R_target.size() != N) throw InputError("solve_bvp: curvature size mismatch");
  if (!p.R_bar.all_finite() || !p.R_target.all_finite()) throw InputError("solve_bvp: non-finite curvature");
  if (!p.domain.has_boundary()) throw InputError("solve_bvp: domain has no Dirichlet nodes");
  const std::size_t nb = p.domain.boundary_nodes().size();
  if (p.H_bar && p.H_bar->size() != nb) throw InputError("solve_bvp: H_bar must have one value per boundary node");
  if (p.H_target) {
    if (!p.H_bar) throw InputError("solve_bvp: H_target requires H_bar");
    if (p.H_target->size() != nb) throw InputError("solve_bvp: H_target must have one value per boundary node");
  }
}

class NewtonSystem {
 public:
  explicit NewtonSystem(const BvpProblem& p)
      : p_(p),
        c_(4.0 * (p.domain.dimension() - 1.0) / (p.domain.dimension() - 2.0)),
        q_((p.domain.dimension() + 2.0) / (p.domain.dimension() - 2.0)) {
    const auto ops = assemble(p.domain);
    K_ = ops.stiffness.matrix();
    lambda_max_ = stiffness_spectral_bound(ops, p.domain);
    for (std::size_t i = 0; i < p.domain.size(); ++i) {
      if (!p.domain.is_boundary(i)) free_.push_back(i);
    }
    slot_.assign(p.domain.size(), -1);
    for (std::size_t k = 0; k < free_.size(); ++k) slot_[free_[k]] = static_cast<Eigen::Index>(k);
  }

  [[nodiscard]] const std::vector<std::size_t>& free() const { return free_; }

  [[nodiscard]] Eigen::VectorXd residual(const std::vector<double>& u) const {
    const Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(u.size()));
    const Eigen::VectorXd ku = K_ * uv;
    const auto w = p_.domain.weights();
    Eigen::VectorXd F(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) {
      const auto i = free_[k];
      F[static_cast<Eigen::Index>(k)] =
          c_ * ku[static_cast<Eigen::Index>(i)] + w[i] * (p_.R_bar[i] * u[i] - p_.R_target[i] * std::pow(u[i], q_));
    }
    return F;
  }

  [[nodiscard]] double nodal(const Eigen::VectorXd& F) const {
    const auto w = p_.domain.weights();
    double worst = 0.0;
    for (std::size_t k = 0; k < free_.size(); ++k) {
      worst = std::max(worst, std::abs(F[static_cast<Eigen::Index>(k)]) / w[free_[k]]);
    }
    return worst;
  }

  [[nodiscard]] double threshold(const std::vector<double>& u, double tolerance) const {
    double scale = 1.0;
    double sup = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      scale = std::max({scale, std::abs(p_.R_bar[i] * u[i]), std::abs(p_.R_target[i]) * std::pow(u[i], q_)});
      sup = std::max(sup, std::abs(u[i]));
    }
    const double floor = 16.0 * std::numeric_limits<double>::epsilon() * c_ * lambda_max_ * sup;
    return std::max(tolerance * scale, floor);
  }

  [[nodiscard]] SparseMatrix jacobian(const std::vector<double>& u) const {
    const auto w = p_.domain.weights();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(K_.nonZeros()));
    for (int col = 0; col < K_.outerSize(); ++col) {
      const auto jc = slot_[static_cast<std::size_t>(col)];
      if (jc < 0) continue;
      for (SparseMatrix::InnerIterator it(K_, col); it; ++it) {
        const auto ir = slot_[static_cast<std::size_t>(it.row())];
        if (ir >= 0) t.emplace_back(ir, jc, c_ * it.value());
      }
    }
    for (std::size_t k = 0; k < free_.size(); ++k) {
      const auto i = free_[k];
      const auto kk = static_cast<Eigen::Index>(k);
      t.emplace_back(kk, kk, w[i] * (p_.R_bar[i] - q_ * p_.R_target[i] * std::pow(u[i], q_ - 1.0)));
    }
    SparseMatrix J(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(free_.size()));
    J.setFromTriplets(t.begin(), t.end());
    return J;
  }

 private:
  const BvpProblem& p_;
  SparseMatrix K_;
  double lambda_max_ = 0.0;
  double c_;
  double q_;
  std::vector<std::size_t> free_;
  std::vector<Eigen::Index> slot_;
};

std::vector<double> with_unit_boundary(const BvpProblem& p, const FieldOnDomain& guess) {
  if (guess.size() != p.domain.size()) throw InputError("solve_bvp: guess size mismatch");
  std::vector<double> u = guess.values;
  for (auto b : p.domain.boundary_nodes()) u[b] = 1.0;
  for (double x : u) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InputError("solve_bvp: initial guess must be positive");
  }
  return u;
}

void attach_mean_curvature(const BvpProblem& p, BvpResult& r, double h_tolerance) {
  if (!p.H_bar) return;
  BoundaryTrace h_bar;
  h_bar.nodes = p.domain.boundary_nodes();
  h_bar.values = p.H_bar->values;
  r.mean_curvature = mean_curvature_transform(p.domain.dimension(), h_bar, normal_derivative(r.u, p.domain));
  if (!p.H_target) return;
  for (std::size_t k = 0; k < r.mean_curvature->size(); ++k) {
    r.h_mismatch = std::max(r.h_mismatch, std::abs(r.mean_curvature->values[k] - (*p.H_target)[k]));
  }
  r.h_attained = r.h_mismatch <= h_tolerance;
}

FieldOnDomain sup_normalized(FieldOnDomain f) {
  double s = 0.0;
  for (double x : f.values) s = std::max(s, std::abs(x));
  if (s > 0.0) {
    for (double& x : f.values) x /= s;
  }
  return f;
}

double sup_distance(const FieldOnDomain& a, const FieldOnDomain& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

double bvp_residual(const BvpProblem& problem, const FieldOnDomain& u) {
  validate(problem);
  if (u.size() != problem.domain.size()) throw InputError("bvp_residual: size mismatch");
  const NewtonSystem sys(problem);
  return sys.nodal(sys.residual(u.values));
}

double bvp_threshold(const BvpProblem& problem, const FieldOnDomain& u, double tolerance) {
  validate(problem);
  if (u.size() != problem.domain.size()) throw InputError("bvp_threshold: size mismatch");
  return NewtonSystem(problem).threshold(u.values, tolerance);
}

BvpResult solve_bvp(const BvpProblem& problem, const FieldOnDomain& guess, const NewtonOptions& options) {
  validate(problem);
  if (!(options.tolerance > 0.0) || options.max_iterations < 1 || options.max_halvings < 1) {
    throw InputError("solve_bvp: invalid Newton options");
  }
  const NewtonSystem sys(problem);
  std::vector<double> u = with_unit_boundary(problem, guess);
  BvpResult res;
  Eigen::VectorXd F = sys.residual(u);
  double r = sys.nodal(F);
  double threshold = sys.threshold(u, options.tolerance);
  res.history.push_back(r);

  for (int it = 0; it < options.max_iterations && r > threshold; ++it) {
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(sys.jacobian(u));
    if (lu.info() != Eigen::Success) throw SolverError("solve_bvp: singular Jacobian", res.history);
    const Eigen::VectorXd delta = lu.solve(-F);
    if (lu.info() != Eigen::Success || !delta.allFinite()) {
      throw SolverError("solve_bvp: Newton step failed", res.history);
    }

    const double merit = F.norm();
    double lambda = 1.0;
    bool accepted = false;
    bool positivity_only = true;
    std::vector<double> trial(u);
    Eigen::VectorXd trial_F;
    for (int h = 0; h <= options.max_halvings; ++h, lambda *= 0.5) {
      bool positive = true;
      for (std::size_t k = 0; k < sys.free().size(); ++k) {
        const auto i = sys.free()[k];
        trial[i] = u[i] + lambda * delta[static_cast<Eigen::Index>(k)];
        positive = positive && trial[i] > 0.0;
      }
      if (!positive) continue;
      trial_F = sys.residual(trial);
      if (trial_F.norm() <= (1.0 - 1e-4 * lambda) * merit) {
        accepted = true;
        break;
      }
      positivity_only = false;
      if (sys.nodal(trial_F) <= sys.threshold(trial, options.tolerance)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw SolverError(positivity_only ? "solve_bvp: iterate positivity lost"
                                        : "solve_bvp: Newton stagnation after step halving",
                        res.history);
    }
    u.swap(trial);
    F = std::move(trial_F);
    r = sys.nodal(F);
    threshold = sys.threshold(u, options.tolerance);
    res.history.push_back(r);
    res.iterations = it + 1;
  }
  if (r > threshold) throw SolverError("solve_bvp: iteration cap reached", res.history);
  res.u = FieldOnDomain(std::move(u));
  res.residual = r;
  res.threshold = threshold;
  attach_mean_curvature(problem, res, options.h_tolerance);
  return res;
}

bool MultiStartReport::all_converged() const {
  return std::all_of(runs.begin(), runs.end(), [](const auto& r) { return r.result.has_value(); });
}

std::size_t MultiStartReport::admissible_count() const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const auto& r) { return r.admissible; }));
}

MultiStartReport multistart_solve(const BvpProblem& problem, const NewtonOptions& options,
                                  double cluster_radius) {
  validate(problem);
  const std::size_t N = problem.domain.size();
  const FieldOnDomain u1 = sup_normalized(dirichlet_lambda1(problem.domain).u1);
  const FieldOnDomain bubble = sup_normalized(bubble_test_field(problem.domain, 0.2));

  const auto shifted = [&](const FieldOnDomain& f, double a) {
    FieldOnDomain g(N, 1.0);
    for (std::size_t i = 0; i < N; ++i) g[i] += a * f[i];
    return g;
  };
  const std::vector<std::pair<std::string, FieldOnDomain>> starts = {
      {"one", FieldOnDomain(N, 1.0)},
      {"one+0.3u1", shifted(u1, 0.3)},
      {"one-0.3u1", shifted(u1, -0.3)},
      {"one+0.5bubble", shifted(bubble, 0.5)},
  };

  MultiStartReport report;
  for (const auto& [label, guess] : starts) {
    MultiStartRun run;
    run.label = label;
    try {
      run.result = solve_bvp(problem, guess, options);
      for (double x : run.result->u.values) run.deviation = std::max(run.deviation, std::abs(x - 1.0));
      run.admissible = run.result->h_attained;
      const auto& u = run.result->u;
      const bool seen = std::any_of(report.distinct.begin(), report.distinct.end(),
                                    [&](const auto& d) { return sup_distance(d, u) < cluster_radius; });
      if (run.admissible && !seen) report.distinct.push_back(u);
    } catch (const SolverError& e) {
      run.failure = e.what();
    }
    report.runs.push_back(std::move(run));
  }
  return report;
}

FieldOnDomain interpolate_profile(const ShootResult& profile, const DiscreteDomain& domain) {
  if (!domain.is_radial()) throw InputError("interpolate_profile: radial domain required");
  if (profile.r.size() < 2 || !profile.reached_end) throw InputError("interpolate_profile: incomplete profile");
  const auto r = domain.coordinates();
  const auto& R = profile.r;
  constexpr double slack = 1e-12;
  if (r.front() < R.front() - slack * std::abs(R.front()) || r.back() > R.back() + slack * std::abs(R.back())) {
    throw InputError("interpolate_profile: domain extends beyond the profile");
  }
  FieldOnDomain out(domain.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = std::clamp(r[i], R.front(), R.back());
    auto hi = static_cast<std::size_t>(std::upper_bound(R.begin(), R.end(), x) - R.begin());
    hi = std::clamp<std::size_t>(hi, 1, R.size() - 1);
    const std::size_t lo = hi - 1;
    const double h = R[hi] - R[lo];
    const double t = (x - R[lo]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    out[i] = h00 * profile.u[lo] + h10 * h * profile.du[lo] + h01 * profile.u[hi] + h11 * h * profile.du[hi];
  }
  return out;
}

ScalarField radial_boundary_mean_curvature(const DiscreteDomain& domain) {
  if (!domain.is_radial()) throw InputError("radial_boundary_mean_curvature: radial domain required");
  const auto& spec = domain.radial_spec();
  const auto r = domain.coordinates();
  ScalarField out;
  for (auto b : domain.boundary_nodes()) {
    switch (spec.geometry) {
      case RadialGeometry::annulus:
      case RadialGeometry::ball:
        out.values.push_back(domain.radial_normal_sign(b) / r[b]);
        break;
      case RadialGeometry::cap:
        out.values.push_back(std::cos(r[b]) / std::sin(r[b]));
        break;
      default:
        out.values.push_back(0.0);
    }
  }
  return out;
}

}  // namespace curvrig
