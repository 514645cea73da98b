#include "runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "curvrig/errors.hpp"
#include "curvrig/quotient.hpp"
#include "curvrig/shooting.hpp"
#include "curvrig/solver.hpp"
#include "curvrig/spectral.hpp"

namespace curvrig::cli {
namespace {

constexpr double kClusterRadius = 1e-4;
constexpr double kTrivialDeviation = 1e-8;
constexpr double kLapseResidualMax = 1e-6;

DiscreteDomain build_domain(const ScenarioConfig& sc) {
  if (sc.domain->is_mesh) return DiscreteDomain::from_mesh(sc.domain->mesh);
  return DiscreteDomain::radial(sc.domain->radial, sc.n, sc.nodes);
}

double sup_distance(const FieldOnDomain& a, const FieldOnDomain& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double sup_deviation(const FieldOnDomain& u) {
  double d = 0.0;
  for (double x : u.values) d = std::max(d, std::abs(x - 1.0));
  return d;
}

FieldOnDomain sup_normalized(FieldOnDomain f) {
  double top = 0.0;
  for (double x : f.values) top = std::max(top, std::abs(x));
  if (top > 0.0) {
    for (double& x : f.values) x /= top;
  }
  return f;
}

// Second-order one-sided at the ends, central inside.
std::vector<double> radial_derivative(std::span<const double> r, const std::vector<double>& u) {
  const std::size_t m = u.size();
  std::vector<double> du(m, 0.0);
  const double h = r[1] - r[0];
  for (std::size_t i = 1; i + 1 < m; ++i) du[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
  du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
  du[m - 1] = (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) / (2.0 * h);
  return du;
}

Profile field_profile(const std::string& name, const DiscreteDomain& d, const FieldOnDomain& u) {
  Profile p;
  p.name = name;
  if (d.is_radial()) {
    p.columns = {"r", "u", "du"};
    const auto r = d.coordinates();
    const auto du = radial_derivative(r, u.values);
    for (std::size_t i = 0; i < u.size(); ++i) p.rows.push_back({r[i], u[i], du[i]});
  } else {
    p.columns = {"node", "u"};
    for (std::size_t i = 0; i < u.size(); ++i) p.rows.push_back({static_cast<double>(i), u[i]});
  }
  return p;
}

Profile shot_profile(const std::string& name, const ShootResult& s) {
  Profile p{name, {"r", "u", "du"}, {}};
  for (std::size_t i = 0; i < s.r.size(); ++i) p.rows.push_back({s.r[i], s.u[i], s.du[i]});
  return p;
}

void fail(ScenarioOutcome& out, const std::string& why) {
  if (!out.failed) out.failure = why;
  out.failed = true;
}

ReportRow& add_row(ScenarioOutcome& out, const ScenarioConfig& sc, std::string label, std::string verdict,
                   std::vector<Quantity> q) {
  out.rows.push_back(
      {sc.id, out.rows.size(), to_string(sc.kind), std::move(label), std::move(verdict), std::move(q), 0.0});
  return out.rows.back();
}

void run_certificate(const ScenarioConfig& sc, ScenarioOutcome& out) {
  RigidityCertificate cert;
  std::vector<Quantity> extra;
  const auto hyp = sc.hypothesis_equal ? MeanCurvatureHypothesis::equal : MeanCurvatureHypothesis::at_least;
  if (sc.criterion == "einstein-volume") {
    const double vol = build_domain(sc).volume();
    cert = check_einstein_volume(sc.n, vol, *sc.vol_M);
    extra = {{"vol_omega", vol}, {"vol_M", *sc.vol_M}};
  } else {
    const auto d = build_domain(sc);
    const ScalarField R_bar(d.size(), sc.R_bar);
    if (sc.criterion == "eigenvalue") {
      const auto eig = dirichlet_lambda1(d, {sc.eigen_tolerance, sc.eigen_max_iterations});
      cert = check_eigen_criterion(d, R_bar, eig, hyp);
      extra = {{"lambda1", eig.lambda1}, {"eigen_iterations", static_cast<double>(eig.iterations)}};
    } else {
      double Q = sphere_yamabe_constant(sc.n);
      auto source = QuotientSource::closed_form;
      if (sc.Q_value) {
        Q = *sc.Q_value;
      } else if (sc.Q_source == "estimate") {
        Q = estimate_Q(d, R_bar).value;
        source = QuotientSource::estimate;
      }
      cert = check_sobolev_criterion(d, R_bar, Q, sc.safety, source, hyp);
      extra = {{"Q", Q}, {"safety", sc.safety}};
    }
  }
  std::vector<Quantity> q = {{"lhs", cert.lhs}, {"rhs", cert.rhs}, {"margin", cert.margin}};
  q.insert(q.end(), extra.begin(), extra.end());
  add_row(out, sc, sc.criterion, to_string(cert.verdict), std::move(q));
  if (sc.expect && *sc.expect != to_string(cert.verdict)) {
    fail(out, "expected verdict " + *sc.expect + ", got " + to_string(cert.verdict));
  }
  out.certificates.push_back(std::move(cert));
}

void run_bvp(const ScenarioConfig& sc, std::uint64_t seed, ScenarioOutcome& out) {
  const auto d = build_domain(sc);
  BvpProblem p{d, ScalarField(d.size(), sc.R_bar), ScalarField(d.size(), sc.R_target), std::nullopt,
               std::nullopt};
  if (sc.pair) {
    p.H_bar = radial_boundary_mean_curvature(d);
    p.H_target = p.H_bar;
  }
  NewtonOptions opt;
  opt.tolerance = sc.newton_tolerance;
  opt.max_iterations = sc.newton_max_iterations;

  auto report = multistart_solve(p, opt, kClusterRadius);
  if (sc.random_starts > 0) {
    std::mt19937_64 rng(seed ^ fnv1a(sc.id));
    std::uniform_real_distribution<double> amp(-0.5, 0.5);
    std::uniform_real_distribution<double> bump(0.0, 0.6);
    const std::vector<double> scales = {0.1, 0.2, 0.5, 1.0};
    std::uniform_int_distribution<std::size_t> pick(0, scales.size() - 1);
    const auto u1 = sup_normalized(dirichlet_lambda1(d, {sc.eigen_tolerance, sc.eigen_max_iterations}).u1);
    for (int k = 0; k < sc.random_starts; ++k) {
      const double a = amp(rng);
      const double b = bump(rng);
      const auto bubble = sup_normalized(bubble_test_field(d, scales[pick(rng)]));
      FieldOnDomain guess(d.size(), 1.0);
      for (std::size_t i = 0; i < d.size(); ++i) guess[i] += a * u1[i] + b * bubble[i];
      MultiStartRun run;
      run.label = "random-" + std::to_string(k);
      try {
        run.result = solve_bvp(p, guess, opt);
        run.deviation = sup_deviation(run.result->u);
        run.admissible = run.result->h_attained;
      } catch (const SolverError& e) {
        run.failure = e.what();
      }
      if (run.admissible &&
          std::none_of(report.distinct.begin(), report.distinct.end(),
                       [&](const FieldOnDomain& s) { return sup_distance(s, run.result->u) <= kClusterRadius; })) {
        report.distinct.push_back(run.result->u);
      }
      report.runs.push_back(std::move(run));
    }
  }

  std::size_t converged = 0;
  for (const auto& run : report.runs) {
    if (!run.result) {
      add_row(out, sc, run.label, "failed", {});
      continue;
    }
    ++converged;
    const auto& r = *run.result;
    add_row(out, sc, run.label, run.admissible ? "converged" : "inadmissible",
            {{"deviation", run.deviation},
             {"iterations", static_cast<double>(r.iterations)},
             {"residual", r.residual},
             {"threshold", r.threshold},
             {"h_mismatch", r.h_mismatch}});
  }

  std::string verdict = "none";
  if (report.distinct.size() > 1) {
    verdict = "multiple";
  } else if (report.distinct.size() == 1) {
    verdict = sup_deviation(report.distinct.front()) < kTrivialDeviation ? "trivial" : "unique";
  }
  add_row(out, sc, "summary", verdict,
          {{"runs", static_cast<double>(report.runs.size())},
           {"converged", static_cast<double>(converged)},
           {"admissible", static_cast<double>(report.admissible_count())},
           {"distinct", static_cast<double>(report.distinct.size())}});

  if (sc.profiles) {
    for (std::size_t k = 0; k < report.distinct.size(); ++k) {
      out.profiles.push_back(field_profile(sc.id + "-" + std::to_string(k), d, report.distinct[k]));
    }
  }
  if (converged == 0) fail(out, "no multistart run converged");
  if (sc.expect_solutions && *sc.expect_solutions != report.distinct.size()) {
    fail(out, "expected " + std::to_string(*sc.expect_solutions) + " solution(s), found " +
                  std::to_string(report.distinct.size()));
  }
}

void run_scan(const ScenarioConfig& sc, ScenarioOutcome& out) {
  const SlopeGrid grid{sc.slope_min, sc.slope_max, sc.slope_count};
  std::optional<double> first_multiple;
  for (std::size_t k = 0; k < sc.ratios.size(); ++k) {
    const double ratio = sc.ratios[k];
    const double b = sc.inner * ratio;
    const auto set = multiplicity_scan(sc.n, sc.inner, b, sc.R_target, sc.H_target, grid);
    const auto doubled = multiplicity_scan(sc.n, sc.inner, b, sc.R_target, sc.H_target, grid.refined(2));
    std::vector<Quantity> q = {{"ratio", ratio},
                               {"count", static_cast<double>(set.count())},
                               {"count_doubled", static_cast<double>(doubled.count())}};
    std::size_t matched = 0;
    for (std::size_t s = 0; s < set.count(); ++s) {
      const auto& sol = set.solutions[s];
      const std::string tag = std::to_string(s);
      q.push_back({"slope_" + tag, sol.slope});
      q.push_back({"deviation_" + tag, sol.sup_deviation});
      q.push_back({"H_inner_" + tag, sol.mean_curvature_inner});
      q.push_back({"H_outer_" + tag, sol.mean_curvature_outer});
      if (sol.h_matched) ++matched;
      if (sc.profiles) {
        out.profiles.push_back(shot_profile(sc.id + "-" + std::to_string(k) + "-" + tag, sol.profile));
      }
    }
    if (sc.H_target) q.push_back({"h_matched", static_cast<double>(matched)});
    add_row(out, sc, "ratio-" + std::to_string(k), "count=" + std::to_string(set.count()), std::move(q));
    if (!first_multiple && set.count() >= 2) first_multiple = ratio;
    if (doubled.count() != set.count()) {
      fail(out, "count at b/a = " + format_real(ratio) + " changes under slope-grid doubling");
    }
    if (sc.expect_count && *sc.expect_count != set.count()) {
      fail(out, "expected " + std::to_string(*sc.expect_count) + " solution(s), found " +
                    std::to_string(set.count()));
    }
  }
  if (sc.ratios.size() > 1) {
    if (first_multiple) {
      add_row(out, sc, "continuation", "first-multiple", {{"ratio", *first_multiple}});
    } else {
      add_row(out, sc, "continuation", "no-multiple", {});
    }
  }
}

void run_lapse(const ScenarioConfig& sc, ScenarioOutcome& out) {
  const auto d = build_domain(sc);
  LapseField f{FieldOnDomain(d.size(), 0.0), {}};
  if (sc.lapse_field == "cos-theta") {
    const auto th = d.coordinates();
    for (std::size_t i = 0; i < d.size(); ++i) f.f[i] = std::cos(th[i]);
    if (!d.has_boundary()) {
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (std::abs(f.f[i]) < 1e-12) f.zero_set.push_back(i);
      }
      if (f.zero_set.empty()) throw InputError("no grid node on the equator; use an odd node count");
    }
  } else if (sc.lapse_field != "zero") {
    f.f.values.assign(d.size(), *parse_curvature(sc.lapse_field));
  }
  const auto rep = lapse_residual(f, ScalarField(d.size(), sc.R_bar), d);
  const double limit = sc.residual_max.value_or(kLapseResidualMax);
  std::string verdict = "lapse";
  if (rep.degenerate) {
    verdict = "degenerate";
  } else if (!(rep.residual <= limit)) {
    verdict = "not-lapse";
  }
  add_row(out, sc, sc.lapse_field, verdict,
          {{"residual", rep.residual}, {"boundary_gradient_min", rep.boundary_gradient_min}, {"residual_max", limit}});
  if (sc.residual_max && verdict != "lapse") fail(out, "lapse check failed: " + verdict);
}

void run_quotient(const ScenarioConfig& sc, ScenarioOutcome& out) {
  const auto d = build_domain(sc);
  const auto est = estimate_Q(d, ScalarField(d.size(), sc.R_bar));
  const double S = sphere_yamabe_constant(sc.n);
  std::vector<Quantity> q = {{"Q", est.value},
                             {"extrapolated", est.extrapolated},
                             {"upper_bound", est.upper_bound},
                             {"sphere_constant", S}};
  for (std::size_t k = 0; k < est.stages.size(); ++k) {
    q.push_back({"stage_" + std::to_string(k), est.stages[k].value});
  }
  const bool within = est.value <= 1.02 * S;
  add_row(out, sc, "estimate", within ? "within-bound" : "above-bound", std::move(q));
  if (sc.profiles) out.profiles.push_back(field_profile(sc.id + "-minimizer", d, est.minimizer));
  if (!within) fail(out, "estimate exceeds 1.02 times the sphere constant");
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_real(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ScenarioOutcome run_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  ScenarioOutcome out;
  out.id = config.id;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (config.kind) {
      case ScenarioKind::certificate:
        run_certificate(config, out);
        break;
      case ScenarioKind::bvp:
        run_bvp(config, seed, out);
        break;
      case ScenarioKind::annulus_scan:
        run_scan(config, out);
        break;
      case ScenarioKind::lapse_check:
        run_lapse(config, out);
        break;
      case ScenarioKind::quotient:
        run_quotient(config, out);
        break;
    }
  } catch (const std::exception& e) {
    fail(out, e.what());
    out.rows.clear();
    out.certificates.clear();
    out.profiles.clear();
    add_row(out, config, "-", "error", {});
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (auto& r : out.rows) r.wall_seconds = wall;
  return out;
}

std::vector<ScenarioOutcome> run_all(const RunConfig& config, int jobs) {
  const std::size_t count = config.scenarios.size();
  std::vector<ScenarioOutcome> outcomes(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      outcomes[k] = run_scenario(config.scenarios[k], config.seed);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, count);
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  std::sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return outcomes;
}

void write_report(std::ostream& out, std::span<const ReportRow> rows) {
  if (rows.empty()) throw ReportError("refusing to write an empty report");
  for (const auto& r : rows) {
    for (const auto& q : r.quantities) {
      if (!std::isfinite(q.value)) {
        throw ReportError("non-finite value for " + q.name + " in scenario " + r.scenario);
      }
    }
  }
  out << "scenario,row,kind,label,verdict,quantities\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.row << ',' << r.kind << ',' << r.label << ',' << r.verdict << ',';
    for (std::size_t k = 0; k < r.quantities.size(); ++k) {
      if (k) out << ';';
      out << r.quantities[k].name << '=' << format_real(r.quantities[k].value);
    }
    out << '\n';
  }
}

void emit_report(std::span<const ReportRow> rows, const std::filesystem::path& path) {
  std::ostringstream text;
  write_report(text, rows);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ReportError("cannot open " + path.string() + " for writing");
  f << text.str();
  if (!f.flush()) throw ReportError("write to " + path.string() + " failed");
}

void write_profile(std::ostream& out, const Profile& profile) {
  for (std::size_t c = 0; c < profile.columns.size(); ++c) out << (c ? "," : "") << profile.columns[c];
  out << '\n';
  for (const auto& row : profile.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!std::isfinite(row[c])) throw ReportError("non-finite value in profile " + profile.name);
      out << (c ? "," : "") << format_real(row[c]);
    }
    out << '\n';
  }
}

void write_outputs(std::span<const ScenarioOutcome> outcomes, const std::filesystem::path& dir) {
  std::vector<ReportRow> rows;
  std::vector<RigidityCertificate> certs;
  for (const auto& o : outcomes) {
    rows.insert(rows.end(), o.rows.begin(), o.rows.end());
    certs.insert(certs.end(), o.certificates.begin(), o.certificates.end());
  }
  // Render everything before touching the filesystem so a refused report leaves no files.
  std::ostringstream report;
  write_report(report, rows);
  std::vector<std::pair<std::string, std::string>> profiles;
  for (const auto& o : outcomes) {
    for (const auto& p : o.profiles) {
      std::ostringstream s;
      write_profile(s, p);
      profiles.emplace_back(p.name, s.str());
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());
  const auto put = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ReportError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f.flush()) throw ReportError("write to " + path.string() + " failed");
  };
  put(dir / "report.csv", report.str());
  if (!certs.empty()) {
    std::ostringstream s;
    write_certificates_csv(s, certs);
    put(dir / "certificates.csv", s.str());
  }
  if (!profiles.empty()) {
    std::filesystem::create_directories(dir / "profiles", ec);
    if (ec) throw ReportError("cannot create " + (dir / "profiles").string() + ": " + ec.message());
    for (const auto& [name, text] : profiles) put(dir / "profiles" / (name + ".csv"), text);
  }
}

}  // namespace curvrig::cli
