#pragma once

#include <optional>
#include <vector>

#include "curvrig/ode.hpp"

namespace curvrig {

struct ShootOptions {
  AdaptiveTolerance tolerance{};
  /// Radii at which the profile is recorded. Empty: `samples` uniform points
  /// on [a, b].
  std::vector<double> output_points;
  std::size_t samples = 257;
};

/// Radial profile of u'' + (n-1)/r u' + c_n R u^{(n+2)/(n-2)} = 0 on a flat
/// annulus, c_n = (n-2)/(4(n-1)), started from u(a) = 1, u'(a) = slope.
struct ShootResult {
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  bool reached_end = false;  ///< false if u hit 0 before r = b
  double r_stop = 0.0;       ///< radius at which the integration stopped
  double u_end = 0.0;        ///< u(b), or 0 if the shot died
  double du_end = 0.0;
};

/// Adaptive Dormand-Prince shot. A shot that reaches u ≤ 0 is reported as
/// `reached_end = false` rather than thrown.
ShootResult radial_shoot(int n, double a, double b, double R_target, double slope,
                         const ShootOptions& options = {});

struct SlopeGrid {
  double min = -2.0;
  double max = 20.0;
  std::size_t count = 200;

  [[nodiscard]] std::vector<double> points() const;
  [[nodiscard]] SlopeGrid refined(std::size_t factor) const;
};

struct ScanOptions {
  ShootOptions shoot{};
  double bisection_tolerance = 1e-12;  ///< on the slope
  double cluster_radius = 1e-4;        ///< sup-norm distance separating solutions
  double h_tolerance = 1e-6;
};

struct RadialSolution {
  double slope = 0.0;
  ShootResult profile;
  double sup_deviation = 0.0;  ///< max |u - 1|
  double mean_curvature_inner = 0.0;
  double mean_curvature_outer = 0.0;
  double h_mismatch = 0.0;     ///< H[g](b) - H_target
  bool h_matched = false;
};

/// Radial solutions with u(a) = u(b) = 1, distinct in sup norm.
struct SolutionSet {
  std::vector<RadialSolution> solutions;
  std::vector<double> slopes;    ///< sweep points
  std::vector<double> matching;  ///< u(b) - 1 at each sweep point (u(b) := 0 for dead shots)

  [[nodiscard]] std::size_t count() const noexcept { return solutions.size(); }
};

/// Mean curvature of the round sphere |x| = r with respect to the outward
/// normal of the annulus, normalized as the average of principal curvatures:
/// +1/r on the outer component, -1/r on the inner one.
double flat_sphere_mean_curvature(double r, bool outer);

/// Sweeps the slope grid, brackets sign changes of u(b; s) - 1, refines each
/// by bisection and clusters the roots. Each solution is annotated with the
/// boundary mean curvatures of g = u^{4/(n-2)} δ; `H_target` (default: the
/// flat outer value 1/b) is compared to the outer one.
SolutionSet multiplicity_scan(int n, double a, double b, double R_target,
                              std::optional<double> H_target, const SlopeGrid& grid,
                              const ScanOptions& options = {});

struct ContinuationRow {
  double ratio = 0.0;
  std::size_t count = 0;
};

struct ContinuationTable {
  std::vector<ContinuationRow> rows;
  std::optional<double> first_multiple;  ///< first ratio with count >= 2
};

/// multiplicity_scan at b = a·ratio for each (strictly increasing) ratio.
ContinuationTable ratio_continuation(int n, double a, const std::vector<double>& ratios,
                                     double R_target, std::optional<double> H_target,
                                     const SlopeGrid& grid, const ScanOptions& options = {});

}  // namespace curvrig
