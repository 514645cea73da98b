#pragma once

#include "curvrig/domain.hpp"
#include "curvrig/fields.hpp"

namespace curvrig {

struct EigenOptions {
  double tolerance = 1e-10;  ///< on ‖Ku - λMu‖ / ‖Mu‖
  int max_iterations = 500;
};

/// First Dirichlet eigenpair of (stiffness, mass).
struct EigenResult {
  double lambda1 = 0.0;
  FieldOnDomain u1;  ///< ∫ u1² dV = 1, positive interior mean, zero on Dirichlet nodes
  double residual = 0.0;
  int iterations = 0;
};

/// Smallest generalized eigenpair on the free nodes by inverse (zero-shift)
/// iteration with conjugate-gradient inner solves.
///
/// The convergence test uses max(tolerance, 64 ε λ_max), where λ_max is a
/// Gershgorin bound on M⁻¹K: below that the residual is round-off and cannot
/// decrease further on fine grids.
///
/// Throws InputError if the domain has no Dirichlet or no free nodes, and
/// SolverError (carrying the residual history) if the cap is hit.
EigenResult dirichlet_lambda1(const DiscreteDomain& domain, const EigenOptions& options = {});

/// (fᵀKf) / (fᵀMf) for a non-zero field vanishing on Dirichlet nodes.
double rayleigh_quotient(const FieldOnDomain& field, const DiscreteDomain& domain);

}  // namespace curvrig
