#pragma once

#include <optional>
#include <vector>

#include "curvrig/domain.hpp"
#include "curvrig/fields.hpp"

namespace curvrig {

/// Q(Sⁿ, g₀) = n(n-2)/4 · |Sⁿ|^{2/n}.
double sphere_yamabe_constant(int n);

/// Closed-form Yamabe quotient of a compact Einstein manifold with scalar
/// curvature R > 0 and volume vol: (n-2)/(4(n-1)) R vol^{2/n}.
double einstein_quotient(int n, double R, double vol);

/// Critical Sobolev exponent 2n/(n-2).
double critical_exponent(int n);

/// Yamabe-type functional at exponent p:
///   (∫|∇u|² + (n-2)/(4(n-1)) R̄ u² dV) / (∫|u|^p dV)^{2/p}
/// for the piecewise-linear interpolant of u (and of R̄), by cell quadrature.
double yamabe_functional(const FieldOnDomain& u, const DiscreteDomain& domain,
                         const ScalarField& R_bar, double p);

struct QuotientParams {
  /// Continuation schedule; p = 2n/(n-2) - ε for each entry, in order.
  std::vector<double> epsilons = {0.5, 0.2, 0.1, 0.05};
  int max_iterations = 2000;
  double relative_tolerance = 1e-8;
  /// Starting field. Defaults to the first Dirichlet eigenfunction, or u ≡ 1
  /// on closed domains.
  std::optional<FieldOnDomain> start;
  /// Bubble widths for the upper bound, as fractions of the domain extent.
  std::vector<double> bubble_scales = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
};

struct QuotientStage {
  double epsilon = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Approximate Q(Ω, ḡ). Not a certified bound in either direction.
struct QuotientEstimate {
  int n = 0;
  std::vector<QuotientStage> stages;
  double extrapolated = 0.0;  ///< Richardson extrapolation of the last two stages to ε = 0
  /// Best critical-exponent value over bubble test fields. The functional is
  /// evaluated exactly for the P1 interpolant, so this bounds Q(Ω) from above.
  double upper_bound = 0.0;
  double value = 0.0;         ///< min(extrapolated, upper_bound): the reported estimate
  FieldOnDomain minimizer;    ///< last-stage minimizer, normalized in L^p
};

/// Minimizes the subcritical functional for each ε by H¹-preconditioned
/// gradient descent with backtracking (halving until decrease), normalizing
/// the iterate in L^p after every step. Stops on relative change below the
/// tolerance or at the iteration cap.
///
/// Radial annuli and intervals are rejected: their grids carry only radial
/// fields, whose infimum can exceed Q(Ω). Balls, caps and spheres are fine by
/// symmetrization.
///
/// Throws UnsupportedDimension for n < 3, InputError for the geometries above
/// and SolverError if the functional becomes non-finite.
QuotientEstimate estimate_Q(const DiscreteDomain& domain, const ScalarField& R_bar,
                            const QuotientParams& params = {});

/// The cut-off bubble test field used for the upper bound, width = scale ×
/// domain extent. On closed radial domains this is u ≡ 1.
FieldOnDomain bubble_test_field(const DiscreteDomain& domain, double scale);

}  // namespace curvrig
