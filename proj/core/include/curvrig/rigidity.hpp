#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "curvrig/domain.hpp"
#include "curvrig/fields.hpp"
#include "curvrig/spectral.hpp"

namespace curvrig {

enum class Criterion { sobolev, eigenvalue, einstein_volume };
enum class Verdict { rigid, inconclusive };

/// Which boundary mean-curvature hypothesis the caller asserts. Only the
/// inequality is used by the argument; equality is its special case.
enum class MeanCurvatureHypothesis { at_least, equal };

/// Where the Q value fed to the Sobolev criterion came from.
enum class QuotientSource { closed_form, estimate };

const char* to_string(Criterion c);
const char* to_string(Verdict v);

/// A sufficient-condition check: rigid iff lhs < rhs. "inconclusive" never
/// means non-rigid.
struct RigidityCertificate {
  Criterion criterion = Criterion::eigenvalue;
  int n = 0;
  std::string domain;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  ///< rhs - lhs
  Verdict verdict = Verdict::inconclusive;
  std::string provenance;

  /// FNV-1a of the provenance string, hex encoded.
  [[nodiscard]] std::string provenance_hash() const;
};

/// lhs = (n+2)/(4(n-1)) (∫ (R̄⁺)^{n/2} dV)^{2/n}, rhs = safety · Q.
RigidityCertificate check_sobolev_criterion(
    const DiscreteDomain& domain, const ScalarField& R_bar, double Q_value, double safety = 0.9,
    QuotientSource source = QuotientSource::estimate,
    MeanCurvatureHypothesis hypothesis = MeanCurvatureHypothesis::at_least);

/// lhs = max_nodes R̄ / (n-1), rhs = λ₁(domain).
RigidityCertificate check_eigen_criterion(
    const DiscreteDomain& domain, const ScalarField& R_bar, const EigenOptions& options = {},
    MeanCurvatureHypothesis hypothesis = MeanCurvatureHypothesis::equal);

/// Same as above with a precomputed eigenpair.
RigidityCertificate check_eigen_criterion(
    const DiscreteDomain& domain, const ScalarField& R_bar, const EigenResult& eig,
    MeanCurvatureHypothesis hypothesis = MeanCurvatureHypothesis::equal);

/// Einstein volume bound: lhs = |Ω|, rhs = ((n-2)/(n+2))^{n/2} Vol(M).
RigidityCertificate check_einstein_volume(int n, double vol_omega, double vol_M);

/// One CSV row per certificate, preceded by a header:
/// criterion,n,domain,lhs,rhs,margin,verdict,provenance_hash
void write_certificates_csv(std::ostream& out, std::span<const RigidityCertificate> certs);

/// v = u - 1 with the split Ω₁ = {u < 1}, Ω₂ = {u ≥ 1}.
struct DeficitField {
  FieldOnDomain v;
  std::vector<std::size_t> omega1;
  std::vector<std::size_t> omega2;
};

struct SupersolutionOptions {
  double boundary_tolerance = 1e-8;   ///< allowed |u - 1| on Dirichlet nodes
  double residual_tolerance = 1e-8;   ///< relative to the problem scale
  /// Set when u came from a solve with R[g] ≥ R[ḡ]; a negative residual is
  /// then flagged as a violation.
  bool expect_supersolution = true;
};

struct SupersolutionReport {
  DeficitField deficit;
  ScalarField residual;           ///< -Δv - A v at free nodes, 0 on Dirichlet nodes
  ScalarField coupling;           ///< A(x)
  double min_residual = 0.0;      ///< over free nodes
  double scale = 1.0;             ///< the residual tolerance is residual_tolerance × scale
  double omega1_form = 0.0;       ///< ∫_{Ω₁} |∇v|² - A v², v extended by zero off Ω₁
  std::size_t coupling_bound_violations = 0;  ///< Ω₁ nodes with A > R̄⁺/(n-1)
  double boundary_dnu_min = 0.0;  ///< outward ∂_ν u over Dirichlet nodes
  double boundary_dnu_max = 0.0;
  double interior_min = 0.0;      ///< min / max of u over free nodes
  double interior_max = 0.0;
  bool violation = false;
};

/// Evaluates the supersolution inequality -Δv - A v ≥ 0 and the Ω₁
/// quadratic form for a conformal factor with u = 1 on the boundary.
///
/// Throws UnsupportedDimension for n < 3, DomainError for u ≤ 0, and
/// InputError if |u - 1| exceeds the tolerance on a Dirichlet node.
SupersolutionReport verify_supersolution(const ConformalFactor& u, const ScalarField& R_bar,
                                         const DiscreteDomain& domain,
                                         const SupersolutionOptions& options = {});

/// β = v / u₁ and the nodal value of Δβ + (A - λ)β + (∇u₁/u₁)·∇β.
struct RatioTrace {
  FieldOnDomain beta;
  FieldOnDomain residual;       ///< 0 on Dirichlet nodes
  double max_residual = 0.0;    ///< over free nodes
  std::size_t positive_count = 0;  ///< free nodes with residual above tolerance
};

/// β is extended to Dirichlet nodes by the ratio of normal derivatives.
/// Throws NumericalError if u₁ falls below 1e-12 × max u₁ at a free node.
RatioTrace eigen_ratio_trace(const FieldOnDomain& v, const EigenResult& eig, const ScalarField& R_bar,
                             const DiscreteDomain& domain, double tolerance = 1e-8);

struct LapseField {
  FieldOnDomain f;
  /// Nodes of the zero set {f = 0}; defaults to the domain's Dirichlet nodes.
  std::vector<std::size_t> zero_set;
};

struct LapseReport {
  double residual = 0.0;                ///< L² norm of -Δf - R̄ f/(n-1) over free nodes
  double boundary_gradient_min = 0.0;   ///< min |∂_ν f| over the zero set
  bool degenerate = false;              ///< boundary_gradient_min below 1e-8
};

/// Checks the lapse equation -Δf = R̄ f/(n-1) and ∇f ≠ 0 on {f = 0}. Radial
/// domains use the fourth-order Laplacian.
LapseReport lapse_residual(const LapseField& f, const ScalarField& R_bar, const DiscreteDomain& domain);

}  // namespace curvrig
