#include "curvrig/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "curvrig/conformal.hpp"
#include "curvrig/errors.hpp"
#include "curvrig/operators.hpp"

namespace curvrig {
namespace {

std::string real17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* to_string(MeanCurvatureHypothesis h) {
  return h == MeanCurvatureHypothesis::equal ? "H[g]=H[gbar]" : "H[g]>=H[gbar]";
}

RigidityCertificate make_certificate(Criterion c, int n, std::string domain, double lhs, double rhs,
                                     std::string provenance) {
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
    throw NumericalError(std::string("certificate ") + to_string(c) + " has non-finite sides");
  }
  RigidityCertificate cert;
  cert.criterion = c;
  cert.n = n;
  cert.domain = std::move(domain);
  cert.lhs = lhs;
  cert.rhs = rhs;
  cert.margin = rhs - lhs;
  cert.verdict = cert.margin > 0.0 ? Verdict::rigid : Verdict::inconclusive;
  cert.provenance = std::move(provenance);
  return cert;
}

void require_size(std::size_t got, const DiscreteDomain& d, const char* op) {
  if (got != d.size()) throw InputError(std::string(op) + ": field size does not match domain");
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::sobolev:
      return "sobolev";
    case Criterion::eigenvalue:
      return "eigenvalue";
    case Criterion::einstein_volume:
      return "einstein-volume";
  }
  return "?";
}

const char* to_string(Verdict v) { return v == Verdict::rigid ? "rigid" : "inconclusive"; }

std::string RigidityCertificate::provenance_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : provenance) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RigidityCertificate check_sobolev_criterion(const DiscreteDomain& domain, const ScalarField& R_bar,
                                            double Q_value, double safety, QuotientSource source,
                                            MeanCurvatureHypothesis hypothesis) {
  const int n = domain.dimension();
  if (n < 3) throw UnsupportedDimension("Sobolev criterion requires n >= 3");
  require_size(R_bar.size(), domain, "check_sobolev_criterion");
  if (!(Q_value > 0.0) || !std::isfinite(Q_value)) throw InputError("Q value must be positive");
  if (!(safety > 0.0 && safety <= 1.0)) throw InputError("safety factor must lie in (0, 1]");

  const double nd = n;
  const double integral = integrate_power(positive_part(R_bar), nd / 2.0, domain);
  const double lhs = (nd + 2.0) / (4.0 * (nd - 1.0)) * std::pow(integral, 2.0 / nd);
  const double rhs = safety * Q_value;
  const std::string prov = "criterion=sobolev;domain=" + domain.descriptor() + ";Q=" + real17(Q_value) +
                           ";Q_source=" + (source == QuotientSource::closed_form ? "closed-form" : "estimate") +
                           ";safety=" + real17(safety) + ";hypothesis=" + to_string(hypothesis);
  return make_certificate(Criterion::sobolev, n, domain.descriptor(), lhs, rhs, prov);
}

RigidityCertificate check_eigen_criterion(const DiscreteDomain& domain, const ScalarField& R_bar,
                                          const EigenOptions& options,
                                          MeanCurvatureHypothesis hypothesis) {
  return check_eigen_criterion(domain, R_bar, dirichlet_lambda1(domain, options), hypothesis);
}

RigidityCertificate check_eigen_criterion(const DiscreteDomain& domain, const ScalarField& R_bar,
                                          const EigenResult& eig, MeanCurvatureHypothesis hypothesis) {
  const int n = domain.dimension();
  if (n < 2) throw UnsupportedDimension("eigenvalue criterion requires n >= 2");
  require_size(R_bar.size(), domain, "check_eigen_criterion");
  if (R_bar.size() == 0) throw InputError("empty curvature field");
  const double sup_R = *std::max_element(R_bar.values.begin(), R_bar.values.end());
  const double lhs = sup_R / (n - 1.0);
  const std::string prov = "criterion=eigenvalue;domain=" + domain.descriptor() +
                           ";supR=" + real17(sup_R) + ";lambda1=" + real17(eig.lambda1) +
                           ";residual=" + real17(eig.residual) +
                           ";iterations=" + std::to_string(eig.iterations) +
                           ";hypothesis=" + to_string(hypothesis);
  return make_certificate(Criterion::eigenvalue, n, domain.descriptor(), lhs, eig.lambda1, prov);
}

RigidityCertificate check_einstein_volume(int n, double vol_omega, double vol_M) {
  if (n < 3) throw UnsupportedDimension("Einstein volume bound requires n >= 3");
  if (!(vol_omega >= 0.0) || !(vol_M > 0.0) || !std::isfinite(vol_omega) || !std::isfinite(vol_M)) {
    throw InputError("volumes must be finite, |Omega| >= 0 and Vol(M) > 0");
  }
  const double nd = n;
  const double rhs = std::pow((nd - 2.0) / (nd + 2.0), nd / 2.0) * vol_M;
  const std::string prov = "criterion=einstein-volume;n=" + std::to_string(n) +
                           ";vol_omega=" + real17(vol_omega) + ";vol_M=" + real17(vol_M);
  return make_certificate(Criterion::einstein_volume, n, "volume", vol_omega, rhs, prov);
}

void write_certificates_csv(std::ostream& out, std::span<const RigidityCertificate> certs) {
  out << "criterion,n,domain,lhs,rhs,margin,verdict,provenance_hash\n";
  for (const auto& c : certs) {
    out << to_string(c.criterion) << ',' << c.n << ',' << c.domain << ',' << real17(c.lhs) << ','
        << real17(c.rhs) << ',' << real17(c.margin) << ',' << to_string(c.verdict) << ','
        << c.provenance_hash() << '\n';
  }
}

SupersolutionReport verify_supersolution(const ConformalFactor& u, const ScalarField& R_bar,
                                         const DiscreteDomain& domain,
                                         const SupersolutionOptions& options) {
  const int n = u.dimension();
  if (n < 3 || u.convention() != Convention::power) {
    throw UnsupportedDimension("verify_supersolution requires the power convention (n >= 3)");
  }
  if (domain.dimension() != n) throw InputError("verify_supersolution: dimension mismatch");
  require_size(u.size(), domain, "verify_supersolution");
  require_size(R_bar.size(), domain, "verify_supersolution");
  for (auto b : domain.boundary_nodes()) {
    if (std::abs(u[b] - 1.0) > options.boundary_tolerance) {
      throw InputError("verify_supersolution: u = " + real17(u[b]) + " on boundary node " +
                       std::to_string(b) + ", expected 1");
    }
  }

  SupersolutionReport rep;
  auto& def = rep.deficit;
  def.v = FieldOnDomain(u.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    def.v[i] = u[i] - 1.0;
    (u[i] < 1.0 ? def.omega1 : def.omega2).push_back(i);
  }
  rep.coupling = coupling_A(n, R_bar, u);

  const auto ops = assemble(domain);
  const auto kv = ops.stiffness.apply(def.v.values);
  const auto w = domain.weights();
  const double vmax = max_abs(def.v.values);
  rep.scale = std::max(1.0, max_abs(R_bar.values)) * std::max(1.0, vmax);
  const double threshold =
      std::max(options.residual_tolerance * rep.scale,
               64.0 * std::numeric_limits<double>::epsilon() * stiffness_spectral_bound(ops, domain) * vmax);

  rep.residual = ScalarField(u.size(), 0.0);
  rep.min_residual = std::numeric_limits<double>::infinity();
  rep.interior_min = std::numeric_limits<double>::infinity();
  rep.interior_max = -std::numeric_limits<double>::infinity();
  for (auto i : ops.stiffness.free_indices()) {
    rep.residual[i] = kv[i] / w[i] - rep.coupling[i] * def.v[i];
    rep.min_residual = std::min(rep.min_residual, rep.residual[i]);
    rep.interior_min = std::min(rep.interior_min, u[i]);
    rep.interior_max = std::max(rep.interior_max, u[i]);
  }

  FieldOnDomain v1(u.size(), 0.0);
  for (auto i : def.omega1) v1[i] = def.v[i];
  rep.omega1_form = ops.stiffness.form(v1.values, v1.values);
  const double limit = 1.0 / (n - 1.0);
  for (auto i : def.omega1) {
    rep.omega1_form -= w[i] * rep.coupling[i] * v1[i] * v1[i];
    if (rep.coupling[i] > std::max(0.0, R_bar[i]) * limit) ++rep.coupling_bound_violations;
  }

  if (domain.has_boundary()) {
    std::vector<double> uv(u.values().begin(), u.values().end());
    const auto trace = normal_derivative(FieldOnDomain(std::move(uv)), domain);
    rep.boundary_dnu_min = *std::min_element(trace.normal_derivative.begin(), trace.normal_derivative.end());
    rep.boundary_dnu_max = *std::max_element(trace.normal_derivative.begin(), trace.normal_derivative.end());
  }
  rep.violation = (options.expect_supersolution && rep.min_residual < -threshold) ||
                  rep.coupling_bound_violations > 0;
  return rep;
}

RatioTrace eigen_ratio_trace(const FieldOnDomain& v, const EigenResult& eig, const ScalarField& R_bar,
                             const DiscreteDomain& domain, double tolerance) {
  const int n = domain.dimension();
  if (n < 3) throw UnsupportedDimension("eigen_ratio_trace requires n >= 3");
  require_size(v.size(), domain, "eigen_ratio_trace");
  require_size(eig.u1.size(), domain, "eigen_ratio_trace");
  require_size(R_bar.size(), domain, "eigen_ratio_trace");

  const auto interior = domain.interior_nodes();
  const double umax = max_abs(eig.u1.values);
  const double floor = 1e-12 * umax;
  for (auto i : interior) {
    if (!(eig.u1[i] > floor)) {
      throw NumericalError("eigen_ratio_trace: u1 below positivity floor at node " + std::to_string(i));
    }
  }

  RatioTrace out;
  out.beta = FieldOnDomain(v.size(), 0.0);
  for (auto i : interior) out.beta[i] = v[i] / eig.u1[i];
  if (domain.has_boundary()) {
    // L'Hôpital: β = ∂_ν v / ∂_ν u₁ where both vanish.
    const auto dv = normal_derivative(v, domain);
    const auto du = normal_derivative(eig.u1, domain);
    for (std::size_t k = 0; k < dv.size(); ++k) {
      const double denom = du.normal_derivative[k];
      out.beta[dv.nodes[k]] = std::abs(denom) > floor ? dv.normal_derivative[k] / denom : 0.0;
    }
  }

  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0 + v[i];
  const auto A = coupling_A(n, R_bar, ConformalFactor::power(n, std::move(u)));
  const auto lap = laplacian(out.beta, domain);
  const auto grad = gradient_dot(eig.u1, out.beta, domain);

  out.residual = FieldOnDomain(v.size(), 0.0);
  out.max_residual = -std::numeric_limits<double>::infinity();
  for (auto i : interior) {
    const double r = lap[i] + (A[i] - eig.lambda1) * out.beta[i] + grad[i] / eig.u1[i];
    out.residual[i] = r;
    out.max_residual = std::max(out.max_residual, r);
    if (r > tolerance) ++out.positive_count;
  }
  return out;
}

LapseReport lapse_residual(const LapseField& f, const ScalarField& R_bar, const DiscreteDomain& domain) {
  const int n = domain.dimension();
  if (n < 2) throw UnsupportedDimension("lapse_residual requires n >= 2");
  require_size(f.f.size(), domain, "lapse_residual");
  require_size(R_bar.size(), domain, "lapse_residual");

  const auto lap = laplacian(f.f, domain,
                             domain.is_radial() ? LaplacianScheme::high_order : LaplacianScheme::variational);
  const auto w = domain.weights();
  const double inv = 1.0 / (n - 1.0);
  double sum = 0.0;
  for (auto i : domain.interior_nodes()) {
    const double r = -lap[i] - R_bar[i] * inv * f.f[i];
    sum += w[i] * r * r;
  }

  LapseReport rep;
  rep.residual = std::sqrt(sum);
  const auto zero_set = f.zero_set.empty() ? domain.boundary_nodes() : f.zero_set;
  if (zero_set.empty()) {
    rep.boundary_gradient_min = 0.0;
    rep.degenerate = true;
    return rep;
  }
  const auto trace = domain.has_boundary() ? normal_derivative(f.f, domain) : BoundaryTrace{};
  const auto grad2 = gradient_dot(f.f, f.f, domain);
  rep.boundary_gradient_min = std::numeric_limits<double>::infinity();
  for (auto z : zero_set) {
    if (z >= domain.size()) throw InputError("lapse zero-set node out of range");
    double g = std::sqrt(grad2[z]);
    const auto it = std::find(trace.nodes.begin(), trace.nodes.end(), z);
    if (it != trace.nodes.end()) g = std::abs(trace.normal_derivative[static_cast<std::size_t>(it - trace.nodes.begin())]);
    rep.boundary_gradient_min = std::min(rep.boundary_gradient_min, g);
  }
  rep.degenerate = rep.boundary_gradient_min < 1e-8;
  return rep;
}

}  // namespace curvrig
