#include "curvrig/spectral.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <limits>

#include "curvrig/errors.hpp"
#include "curvrig/operators.hpp"

namespace curvrig {

EigenResult dirichlet_lambda1(const DiscreteDomain& domain, const EigenOptions& options) {
  if (!domain.has_boundary()) throw InputError("dirichlet_lambda1: domain has no Dirichlet nodes");
  const auto ops = assemble(domain);
  const auto& free = ops.stiffness.free_indices();
  if (free.empty()) throw InputError("dirichlet_lambda1: domain has no interior nodes");

  const SparseMatrix K = ops.stiffness.free_block();
  const SparseMatrix M = ops.mass.free_block();
  const auto nf = static_cast<Eigen::Index>(free.size());

  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(std::max<Eigen::Index>(2000, 8 * nf));
  cg.compute(K);

  const double floor =
      64.0 * std::numeric_limits<double>::epsilon() * stiffness_spectral_bound(ops, domain);
  const double tol = std::max(options.tolerance, floor);

  Eigen::VectorXd x = Eigen::VectorXd::Ones(nf);
  x /= std::sqrt(x.dot(M * x));
  double lambda = x.dot(K * x);
  std::vector<double> history;

  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd rhs = M * x;
    Eigen::VectorXd y = cg.solveWithGuess(rhs, x / lambda);
    if (!y.allFinite()) throw SolverError("dirichlet_lambda1: inner solve produced non-finite values", history);
    x = y / std::sqrt(y.dot(M * y));
    const Eigen::VectorXd kx = K * x;
    const Eigen::VectorXd mx = M * x;
    lambda = x.dot(kx);
    const double residual = (kx - lambda * mx).norm() / mx.norm();
    history.push_back(residual);
    if (residual < tol) {
      if (x.sum() < 0.0) x = -x;
      EigenResult out;
      out.lambda1 = lambda;
      out.u1 = ScalarField(domain.size(), 0.0);
      for (Eigen::Index k = 0; k < nf; ++k) out.u1[free[static_cast<std::size_t>(k)]] = x[k];
      out.residual = residual;
      out.iterations = it;
      return out;
    }
  }
  throw SolverError("dirichlet_lambda1: no convergence in " + std::to_string(options.max_iterations) +
                        " iterations (last residual " + std::to_string(history.back()) + ")",
                    history);
}

double rayleigh_quotient(const FieldOnDomain& field, const DiscreteDomain& domain) {
  if (field.size() != domain.size()) throw InputError("rayleigh_quotient: size mismatch");
  for (auto b : domain.boundary_nodes()) {
    if (field[b] != 0.0) {
      throw InputError("rayleigh_quotient: field must vanish on Dirichlet node " + std::to_string(b));
    }
  }
  const auto ops = assemble(domain);
  const double den = ops.mass.form(field.values, field.values);
  if (!(den > 0.0)) throw InputError("rayleigh_quotient: zero field");
  return ops.stiffness.form(field.values, field.values) / den;
}

}  // namespace curvrig
