#include "curvrig/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "curvrig/errors.hpp"

namespace curvrig {
namespace {

void check_factor(int n, const ConformalFactor& u) {
  if (n < 2) throw UnsupportedDimension("dimension must be >= 2");
  if (u.dimension() != n) {
    throw InputError("conformal factor built for n = " + std::to_string(u.dimension()) +
                     ", called with n = " + std::to_string(n));
  }
  const Convention expected = n == 2 ? Convention::exponential : Convention::power;
  if (u.convention() != expected) throw InputError("conformal convention does not match dimension");
}

void check_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InputError(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
  }
}

}  // namespace

ScalarField scalar_curvature_transform(int n, const ScalarField& R_bar, const ConformalFactor& u,
                                       const ScalarField& lap_u) {
  check_factor(n, u);
  check_size(R_bar.size(), u.size(), "scalar_curvature_transform");
  check_size(lap_u.size(), u.size(), "scalar_curvature_transform");

  ScalarField out(u.size(), 0.0);
  if (n == 2) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      out[i] = std::exp(-2.0 * u[i]) * (R_bar[i] - 2.0 * lap_u[i]);
    }
    return out;
  }
  const double nd = n;
  const double c = 4.0 * (nd - 1.0) / (nd - 2.0);
  const double q = (nd + 2.0) / (nd - 2.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = std::pow(u[i], -q) * (R_bar[i] * u[i] - c * lap_u[i]);
  }
  return out;
}

BoundaryTrace mean_curvature_transform(int n, const BoundaryTrace& H_bar,
                                       const BoundaryTrace& u_boundary) {
  if (n < 2) throw UnsupportedDimension("dimension must be >= 2");
  check_size(H_bar.values.size(), u_boundary.values.size(), "mean_curvature_transform");
  check_size(u_boundary.normal_derivative.size(), u_boundary.values.size(),
             "mean_curvature_transform");

  BoundaryTrace out;
  out.nodes = u_boundary.nodes;
  out.values.resize(u_boundary.values.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double u = u_boundary.values[i];
    const double dnu = u_boundary.normal_derivative[i];
    if (n == 2) {
      out.values[i] = std::exp(-u) * (H_bar.values[i] + dnu);
      continue;
    }
    if (!(u > 0.0)) {
      throw DomainError("boundary conformal factor must be positive (boundary index " +
                        std::to_string(i) + ")");
    }
    const double nd = n;
    out.values[i] = std::pow(u, -nd / (nd - 2.0)) * (H_bar.values[i] + 2.0 / (nd - 2.0) * dnu);
  }
  return out;
}

ScalarField positive_part(const ScalarField& R) {
  ScalarField out(R.size(), 0.0);
  std::transform(R.values.begin(), R.values.end(), out.values.begin(),
                 [](double x) { return std::max(0.0, x); });
  return out;
}

namespace detail {

double coupling_ratio_direct(double t, double k) {
  const double d = t - 1.0;
  // t^k - 1 = expm1(k log1p(d)) keeps full relative accuracy for small d.
  return t * std::expm1(k * std::log1p(d)) / (k * d);
}

double coupling_ratio_series(double t, double k) {
  // t (t^k - 1)/(t - 1) = k + c1 d + c2 d² + c3 d³ + O(d⁴), d = t - 1.
  const double d = t - 1.0;
  const double b1 = k * (k - 1.0) / 2.0;
  const double b2 = b1 * (k - 2.0) / 3.0;
  const double b3 = b2 * (k - 3.0) / 4.0;
  const double c1 = k + b1;
  const double c2 = b1 + b2;
  const double c3 = b2 + b3;
  return 1.0 + d * (c1 + d * (c2 + d * c3)) / k;
}

double coupling_ratio(double t, double k) {
  return std::abs(t - 1.0) < kCouplingSeriesSwitch ? coupling_ratio_series(t, k)
                                                    : coupling_ratio_direct(t, k);
}

}  // namespace detail

ScalarField coupling_A(int n, const ScalarField& R_bar, const ConformalFactor& u) {
  if (n == 2) {
    throw UnsupportedDimension("coupling_A is defined for the power convention only (n >= 3)");
  }
  check_factor(n, u);
  check_size(R_bar.size(), u.size(), "coupling_A");

  const double nd = n;
  const double k = 4.0 / (nd - 2.0);
  const double limit = 1.0 / (nd - 1.0);
  ScalarField out(u.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = R_bar[i] * limit * detail::coupling_ratio(u[i], k);
  }
  return out;
}

}  // namespace curvrig
