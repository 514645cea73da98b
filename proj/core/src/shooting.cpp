#include "curvrig/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "curvrig/conformal.hpp"
#include "curvrig/errors.hpp"

namespace curvrig {
namespace {

void validate_annulus(int n, double a, double b) {
  if (n < 3) throw UnsupportedDimension("radial shooting requires n >= 3");
  if (!(a > 0.0 && a < b) || !std::isfinite(b)) throw InputError("annulus needs 0 < a < b");
}

double matching_value(const ShootResult& s) { return (s.reached_end ? s.u_end : 0.0) - 1.0; }

ShootResult endpoint_shot(int n, double a, double b, double R, double slope, const ShootOptions& base) {
  ShootOptions o = base;
  o.output_points = {b};
  return radial_shoot(n, a, b, R, slope, o);
}

double sup_distance(const ShootResult& x, const ShootResult& y) {
  double d = 0.0;
  const std::size_t m = std::min(x.u.size(), y.u.size());
  for (std::size_t i = 0; i < m; ++i) d = std::max(d, std::abs(x.u[i] - y.u[i]));
  return d;
}

}  // namespace

ShootResult radial_shoot(int n, double a, double b, double R_target, double slope,
                         const ShootOptions& options) {
  validate_annulus(n, a, b);
  const double nd = n;
  const double c = (nd - 2.0) / (4.0 * (nd - 1.0)) * R_target;
  const double q = (nd + 2.0) / (nd - 2.0);

  std::vector<double> out = options.output_points;
  if (out.empty()) {
    const std::size_t m = std::max<std::size_t>(options.samples, 2);
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = a + (b - a) * static_cast<double>(i) / (m - 1);
    out.back() = b;
  }
  if (!std::is_sorted(out.begin(), out.end()) || out.front() < a || out.back() > b) {
    throw InputError("radial_shoot: output points must be sorted within [a, b]");
  }

  const auto rhs = [&](double r, const std::array<double, 2>& y) {
    const double u = std::max(y[0], 0.0);
    return std::array<double, 2>{y[1], -(nd - 1.0) / r * y[1] - c * std::pow(u, q)};
  };
  const auto died = [](double, const std::array<double, 2>& y) { return !(y[0] > 0.0); };

  DormandPrince<2> integrator(options.tolerance);
  ShootResult res;
  double r = a;
  std::array<double, 2> y = {1.0, slope};
  double h = 0.0;
  for (double target : out) {
    if (target > r) {
      const auto status = integrator.integrate(rhs, died, r, y, target, h);
      if (status != SegmentStatus::reached) {
        res.reached_end = false;
        res.r_stop = r;
        res.u_end = 0.0;
        res.du_end = y[1];
        return res;
      }
    }
    res.r.push_back(target);
    res.u.push_back(y[0]);
    res.du.push_back(y[1]);
  }
  if (r < b) {
    const auto status = integrator.integrate(rhs, died, r, y, b, h);
    if (status != SegmentStatus::reached) {
      res.r_stop = r;
      res.du_end = y[1];
      return res;
    }
  }
  res.reached_end = true;
  res.r_stop = b;
  res.u_end = y[0];
  res.du_end = y[1];
  return res;
}

std::vector<double> SlopeGrid::points() const {
  if (count < 2 || !(min < max)) throw InputError("slope grid needs min < max and >= 2 points");
  std::vector<double> s(count);
  for (std::size_t i = 0; i < count; ++i) {
    s[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  s.back() = max;
  return s;
}

SlopeGrid SlopeGrid::refined(std::size_t factor) const {
  return {min, max, (count - 1) * factor + 1};
}

double flat_sphere_mean_curvature(double r, bool outer) { return (outer ? 1.0 : -1.0) / r; }

SolutionSet multiplicity_scan(int n, double a, double b, double R_target,
                              std::optional<double> H_target, const SlopeGrid& grid,
                              const ScanOptions& options) {
  validate_annulus(n, a, b);
  if (grid.count < 200) throw InputError("multiplicity_scan needs at least 200 slope points");
  const double h_target = H_target.value_or(flat_sphere_mean_curvature(b, true));

  SolutionSet set;
  set.slopes = grid.points();
  set.matching.reserve(set.slopes.size());
  for (double s : set.slopes) {
    set.matching.push_back(matching_value(endpoint_shot(n, a, b, R_target, s, options.shoot)));
  }

  std::vector<double> roots;
  for (std::size_t i = 0; i < set.slopes.size(); ++i) {
    const double f = set.matching[i];
    if (f == 0.0) {
      roots.push_back(set.slopes[i]);
      continue;
    }
    if (i + 1 == set.slopes.size()) break;
    const double g = set.matching[i + 1];
    if (g == 0.0 || (f < 0.0) == (g < 0.0)) continue;
    double lo = set.slopes[i];
    double hi = set.slopes[i + 1];
    double flo = f;
    while (hi - lo > options.bisection_tolerance * std::max(1.0, std::abs(lo))) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = matching_value(endpoint_shot(n, a, b, R_target, mid, options.shoot));
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  }

  ShootOptions profile_options = options.shoot;
  profile_options.output_points.clear();
  for (double s : roots) {
    RadialSolution sol;
    sol.slope = s;
    sol.profile = radial_shoot(n, a, b, R_target, s, profile_options);
    if (!sol.profile.reached_end || std::abs(sol.profile.u_end - 1.0) > 1e-6) continue;
    const bool duplicate = std::any_of(set.solutions.begin(), set.solutions.end(), [&](const auto& other) {
      return sup_distance(other.profile, sol.profile) < options.cluster_radius;
    });
    if (duplicate) continue;

    for (double u : sol.profile.u) sol.sup_deviation = std::max(sol.sup_deviation, std::abs(u - 1.0));
    BoundaryTrace h_bar;
    h_bar.values = {flat_sphere_mean_curvature(a, false), flat_sphere_mean_curvature(b, true)};
    BoundaryTrace ub;
    ub.values = {1.0, sol.profile.u_end};
    ub.normal_derivative = {-s, sol.profile.du_end};
    const auto H = mean_curvature_transform(n, h_bar, ub);
    sol.mean_curvature_inner = H.values[0];
    sol.mean_curvature_outer = H.values[1];
    sol.h_mismatch = sol.mean_curvature_outer - h_target;
    sol.h_matched = std::abs(sol.h_mismatch) <= options.h_tolerance;
    set.solutions.push_back(std::move(sol));
  }
  return set;
}

ContinuationTable ratio_continuation(int n, double a, const std::vector<double>& ratios,
                                     double R_target, std::optional<double> H_target,
                                     const SlopeGrid& grid, const ScanOptions& options) {
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 1.0) || (i > 0 && !(ratios[i] > ratios[i - 1]))) {
      throw InputError("ratio_continuation: ratios must be > 1 and strictly increasing");
    }
  }
  ContinuationTable table;
  for (double ratio : ratios) {
    const auto set = multiplicity_scan(n, a, a * ratio, R_target, H_target, grid, options);
    table.rows.push_back({ratio, set.count()});
    if (!table.first_multiple && set.count() >= 2) table.first_multiple = ratio;
  }
  return table;
}

}  // namespace curvrig
