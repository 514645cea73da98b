#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curvrig/domain.hpp"
#include "curvrig/fields.hpp"
#include "curvrig/shooting.hpp"

namespace curvrig {

/// c (-Δu) + R̄u - R_target u^{(n+2)/(n-2)} = 0 with u = 1 on the Dirichlet
/// nodes, c = 4(n-1)/(n-2).
struct BvpProblem {
  DiscreteDomain domain;
  ScalarField R_bar;
  ScalarField R_target;
  /// Background boundary mean curvature at each Dirichlet node. When set, the
  /// solve reports H[g] of the result.
  std::optional<ScalarField> H_bar;
  /// Prescribed H[g] per Dirichlet node (requires H_bar). A converged field
  /// whose boundary mean curvature misses it is flagged, not returned as a
  /// solution of the pair problem.
  std::optional<ScalarField> H_target;
};

struct NewtonOptions {
  double tolerance = 1e-10;  ///< relative to the curvature scale of the problem
  int max_iterations = 50;
  int max_halvings = 30;
  double h_tolerance = 1e-6;  ///< on max |H[g] - H_target|
};

struct BvpResult {
  FieldOnDomain u;
  int iterations = 0;
  double residual = 0.0;
  double threshold = 0.0;       ///< convergence threshold actually applied
  std::vector<double> history;  ///< residual before each step and at exit
  std::optional<BoundaryTrace> mean_curvature;
  double h_mismatch = 0.0;      ///< max |H[g] - H_target|, 0 without a target
  bool h_attained = true;
};

/// Nodal residual max_i |c(-Δu)_i + R̄_i u_i - R_target,i u_i^q| over interior
/// nodes, with -Δu = M_L^{-1} K u.
double bvp_residual(const BvpProblem& problem, const FieldOnDomain& u);

/// Convergence threshold for u: max(tolerance · scale, round-off floor), with
/// scale = max(1, |R̄u|_∞, |R_target u^q|_∞) and the floor 16 ε c λ_max |u|_∞.
double bvp_threshold(const BvpProblem& problem, const FieldOnDomain& u, double tolerance);

/// Damped Newton with residual backtracking. The boundary values of the
/// guess are replaced by 1.
///
/// Throws InputError for inconsistent input or a non-positive guess, and
/// SolverError on stagnation, lost positivity or the iteration cap.
BvpResult solve_bvp(const BvpProblem& problem, const FieldOnDomain& guess,
                    const NewtonOptions& options = {});

struct MultiStartRun {
  std::string label;
  std::optional<BvpResult> result;  ///< empty when the run failed
  std::string failure;
  double deviation = 0.0;           ///< ‖u - 1‖_∞ for converged runs
  bool admissible = false;          ///< converged and H_target attained
};

struct MultiStartReport {
  std::vector<MultiStartRun> runs;
  std::vector<FieldOnDomain> distinct;  ///< admissible solutions, clustered in sup norm
  [[nodiscard]] bool all_converged() const;
  [[nodiscard]] std::size_t admissible_count() const;
};

/// Solves from u ≡ 1, 1 ± 0.3 û₁ and 1 + 0.5 b̂, where û₁ is the first Dirichlet
/// eigenfunction and b̂ a bubble test field, both scaled to sup norm 1.
MultiStartReport multistart_solve(const BvpProblem& problem, const NewtonOptions& options = {},
                                  double cluster_radius = 1e-4);

/// Cubic Hermite interpolation of a shooting profile onto a radial domain.
FieldOnDomain interpolate_profile(const ShootResult& profile, const DiscreteDomain& domain);

/// Outward mean curvature of the boundary of a radial domain in its
/// background metric: ±1/r on flat annuli and balls, cot θ₀ on caps.
ScalarField radial_boundary_mean_curvature(const DiscreteDomain& domain);

}  // namespace curvrig
