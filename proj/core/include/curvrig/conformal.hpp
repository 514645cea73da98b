#pragma once

#include "curvrig/fields.hpp"

namespace curvrig {

/// Scalar curvature of g from R[ḡ], the factor, and its ḡ-Laplacian.
///
///   n = 2:  R[g] = e^{-2w} (R̄ - 2Δw)
///   n ≥ 3:  R[g] = u^{-(n+2)/(n-2)} (R̄u - 4(n-1)/(n-2) Δu)
///
/// Δ = div∘grad throughout, so -Δ is positive semidefinite.
ScalarField scalar_curvature_transform(int n, const ScalarField& R_bar, const ConformalFactor& u,
                                       const ScalarField& lap_u);

/// Boundary mean curvature of g.
///
///   n = 2:  H[g] = e^{-w} (H̄ + ∂_ν w)
///   n ≥ 3:  H[g] = u^{-n/(n-2)} (H̄ + 2/(n-2) ∂_ν u)
///
/// `H_bar.values` holds H̄; `u_boundary` holds boundary values of the factor
/// and its outward normal derivative on the same node list. The result reuses
/// the node list, with `normal_derivative` left empty.
BoundaryTrace mean_curvature_transform(int n, const BoundaryTrace& H_bar,
                                       const BoundaryTrace& u_boundary);

ScalarField positive_part(const ScalarField& R);

/// A(x) = (n-2)/(4(n-1)) R̄ u (u^{4/(n-2)} - 1)/(u - 1), with the removable
/// singularity at u = 1 resolved by a Taylor series.
ScalarField coupling_A(int n, const ScalarField& R_bar, const ConformalFactor& u);

namespace detail {

/// |u - 1| below which the series branch is used.
inline constexpr double kCouplingSeriesSwitch = 1e-6;

/// g(t) = t (t^k - 1) / (k (t - 1)), normalized so g(1) = 1. Then
/// A = R̄ g(u) / (n - 1).
double coupling_ratio(double t, double k);
double coupling_ratio_direct(double t, double k);
/// Four-term expansion of g about t = 1.
double coupling_ratio_series(double t, double k);

}  // namespace detail

}  // namespace curvrig
