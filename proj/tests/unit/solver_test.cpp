#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "curvrig/conformal.hpp"
#include "curvrig/errors.hpp"
#include "curvrig/operators.hpp"
#include "curvrig/shooting.hpp"
#include "curvrig/solver.hpp"
#include "curvrig/spectral.hpp"

using namespace curvrig;

namespace {

BvpProblem round_cap(double theta0, std::size_t m, bool with_pair) {
  const auto d = DiscreteDomain::radial(RadialSpec::cap(theta0), 3, m);
  BvpProblem p{d, ScalarField(d.size(), 6.0), ScalarField(d.size(), 6.0), std::nullopt, std::nullopt};
  if (with_pair) {
    p.H_bar = radial_boundary_mean_curvature(d);
    p.H_target = p.H_bar;
  }
  return p;
}

FieldOnDomain perturbed(const DiscreteDomain& d, double amp) {
  auto u1 = dirichlet_lambda1(d).u1;
  const double top = *std::max_element(u1.values.begin(), u1.values.end());
  FieldOnDomain g(d.size(), 1.0);
  for (std::size_t i = 0; i < d.size(); ++i) g[i] += amp * u1[i] / top;
  return g;
}

double deviation(const FieldOnDomain& u) {
  double m = 0.0;
  for (double x : u.values) m = std::max(m, std::abs(x - 1.0));
  return m;
}

}  // namespace

TEST_CASE("solve_bvp: exact solution needs no step") {
  const auto p = round_cap(1.2, 512, false);
  const auto res = solve_bvp(p, FieldOnDomain(p.domain.size(), 1.0));
  CHECK(res.iterations == 0);
  CHECK(res.residual <= res.threshold);
  CHECK(deviation(res.u) == 0.0);
  CHECK(bvp_residual(p, res.u) == res.residual);
  CHECK(res.threshold == bvp_threshold(p, res.u, 1e-10));
  CHECK(res.threshold >= 1e-10 * 6.0);
}

TEST_CASE("solve_bvp: a negative deficit returns to u = 1") {
  for (std::size_t m : {256, 512, 1024}) {
    const auto p = round_cap(1.2, m, false);
    const auto res = solve_bvp(p, perturbed(p.domain, -0.3));
    CAPTURE(m);
    CHECK(deviation(res.u) < 1e-8);
    CHECK(res.residual <= res.threshold);
    CHECK(res.history.size() == static_cast<std::size_t>(res.iterations) + 1);
  }
}

TEST_CASE("solve_bvp: a positive deficit reaches the complementary cap") {
  const double t0 = 1.2;
  const auto p = round_cap(t0, 512, true);
  const auto res = solve_bvp(p, perturbed(p.domain, 0.3));
  CHECK(deviation(res.u) == doctest::Approx(0.4617).epsilon(2e-3));
  for (double x : res.u.values) CHECK(x >= 1.0 - 1e-12);

  // The pullback of the round metric on θ ≥ θ₀ has H[g] = -cot θ₀.
  REQUIRE(res.mean_curvature.has_value());
  const double cot = std::cos(t0) / std::sin(t0);
  CHECK(res.mean_curvature->values.front() == doctest::Approx(-cot).epsilon(1e-3));
  CHECK(res.h_mismatch == doctest::Approx(2.0 * cot).epsilon(1e-3));
  CHECK_FALSE(res.h_attained);

  const auto trace = normal_derivative(res.u, p.domain);
  CHECK(trace.normal_derivative.front() == doctest::Approx(-cot).epsilon(2e-3));
}

TEST_CASE("multistart on the certified cap") {
  SUBCASE("pair problem: every admissible run is u = 1") {
    const auto p = round_cap(1.2, 512, true);
    const auto rep = multistart_solve(p);
    REQUIRE(rep.runs.size() == 4);
    CHECK(rep.runs[0].label == "one");
    CHECK(rep.runs[1].label == "one+0.3u1");
    CHECK(rep.runs[2].label == "one-0.3u1");
    CHECK(rep.runs[3].label == "one+0.5bubble");
    CHECK(rep.all_converged());
    CHECK(rep.admissible_count() >= 2);
    for (const auto& run : rep.runs) {
      CAPTURE(run.label);
      if (run.admissible) CHECK(run.deviation < 1e-8);
      if (!run.admissible) CHECK(run.result->h_mismatch > 1e-6);
    }
    REQUIRE(rep.distinct.size() == 1);
    CHECK(deviation(rep.distinct.front()) < 1e-8);
  }

  SUBCASE("Dirichlet data alone admits the second solution") {
    const auto p = round_cap(1.2, 512, false);
    const auto rep = multistart_solve(p);
    CHECK(rep.all_converged());
    CHECK(rep.admissible_count() == 4);
    CHECK(rep.distinct.size() == 2);
  }

  SUBCASE("small caps have a single solution") {
    const auto p = round_cap(0.6, 256, false);
    const auto rep = multistart_solve(p);
    CHECK(rep.all_converged());
    CHECK(rep.distinct.size() == 1);
    for (const auto& run : rep.runs) CHECK(run.deviation < 1e-8);
  }
}

TEST_CASE("solve_bvp: annulus solutions from shooting guesses") {
  const auto set = multiplicity_scan(3, 1.0, 2.0, 6.0, std::nullopt, SlopeGrid{});
  REQUIRE(set.count() == 2);
  const auto d = DiscreteDomain::radial(RadialSpec::annulus(1.0, 2.0), 3, 512);
  BvpProblem p{d, ScalarField(d.size(), 0.0), ScalarField(d.size(), 6.0), std::nullopt, std::nullopt};
  std::vector<FieldOnDomain> found;
  for (const auto& s : set.solutions) {
    const auto guess = interpolate_profile(s.profile, d);
    const auto res = solve_bvp(p, guess);
    CAPTURE(s.slope);
    // Shooting and the discrete problem agree up to O(h²); one Newton step closes the gap.
    REQUIRE(res.history.size() >= 2);
    CHECK(res.history[1] < 1e-8);
    CHECK(res.iterations <= 2);
    double gap = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) gap = std::max(gap, std::abs(res.u[i] - guess[i]));
    CHECK(gap < 1e-5);
    CHECK(deviation(res.u) > 0.1);
    for (double x : res.u.values) CHECK(x > 0.0);

    const auto R = scalar_curvature_transform(3, p.R_bar, ConformalFactor::power(3, res.u.values),
                                              laplacian(res.u, d));
    double err = 0.0;
    for (auto i : d.interior_nodes()) err = std::max(err, std::abs(R[i] - 6.0) / 6.0);
    CHECK(err < 1e-4);
    found.push_back(res.u);
  }
  double sep = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) sep = std::max(sep, std::abs(found[0][i] - found[1][i]));
  CHECK(sep > 1e-4);
}

TEST_CASE("solve_bvp: errors") {
  const auto p = round_cap(1.2, 128, false);
  const std::size_t N = p.domain.size();

  SUBCASE("non-positive guess") {
    FieldOnDomain g(N, 1.0);
    g[N / 2] = -0.1;
    CHECK_THROWS_AS(solve_bvp(p, g), InputError);
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(solve_bvp(p, FieldOnDomain(3, 1.0)), InputError);
    auto q = p;
    q.R_target = ScalarField(3, 6.0);
    CHECK_THROWS_AS(solve_bvp(q, FieldOnDomain(N, 1.0)), InputError);
  }
  SUBCASE("non-finite target") {
    auto q = p;
    q.R_target[4] = std::nan("");
    CHECK_THROWS_AS(solve_bvp(q, FieldOnDomain(N, 1.0)), InputError);
  }
  SUBCASE("H target without background") {
    auto q = p;
    q.H_target = ScalarField(p.domain.boundary_nodes().size(), 0.0);
    CHECK_THROWS_AS(solve_bvp(q, FieldOnDomain(N, 1.0)), InputError);
  }
  SUBCASE("closed domain and surfaces") {
    const auto s = DiscreteDomain::radial(RadialSpec::sphere(), 3, 64);
    BvpProblem q{s, ScalarField(64, 6.0), ScalarField(64, 6.0), std::nullopt, std::nullopt};
    CHECK_THROWS_AS(solve_bvp(q, FieldOnDomain(64, 1.0)), InputError);
    const auto d2 = DiscreteDomain::radial(RadialSpec::cap(1.0), 2, 64);
    BvpProblem r{d2, ScalarField(64, 2.0), ScalarField(64, 2.0), std::nullopt, std::nullopt};
    CHECK_THROWS_AS(solve_bvp(r, FieldOnDomain(64, 1.0)), InputError);
  }
  SUBCASE("iteration cap carries the history") {
    NewtonOptions opt;
    opt.max_iterations = 1;
    try {
      (void)solve_bvp(p, perturbed(p.domain, 0.3), opt);
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK(std::string(e.what()).find("iteration cap") != std::string::npos);
      CHECK(e.residual_history().size() == 2);
    }
  }
}

TEST_CASE("interpolate_profile") {
  const auto shot = radial_shoot(3, 1.0, 2.0, 6.0, 0.5);
  const auto d = DiscreteDomain::radial(RadialSpec::annulus(1.0, 2.0), 3, 100);
  const auto u = interpolate_profile(shot, d);
  CHECK(u[0] == 1.0);
  CHECK(u[d.size() - 1] == doctest::Approx(shot.u_end).epsilon(1e-14));
  ShootOptions opt;
  opt.output_points.assign(d.coordinates().begin(), d.coordinates().end());
  const auto direct = radial_shoot(3, 1.0, 2.0, 6.0, 0.5, opt);
  double err = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) err = std::max(err, std::abs(u[i] - direct.u[i]));
  CHECK(err < 1e-8);

  CHECK_THROWS_AS(interpolate_profile(shot, DiscreteDomain::from_mesh(unit_square_mesh(3))), InputError);
  CHECK_THROWS_AS(interpolate_profile(shot, DiscreteDomain::radial(RadialSpec::annulus(1.0, 3.0), 3, 50)),
                  InputError);
  CHECK_THROWS_AS(interpolate_profile(radial_shoot(3, 1.0, 3.0, 6.0, -5.0), d), InputError);
}

TEST_CASE("radial boundary mean curvature") {
  const auto cap = DiscreteDomain::radial(RadialSpec::cap(1.2), 3, 64);
  const auto hc = radial_boundary_mean_curvature(cap);
  REQUIRE(hc.size() == 1);
  CHECK(hc[0] == doctest::Approx(std::cos(1.2) / std::sin(1.2)));

  const auto ann = DiscreteDomain::radial(RadialSpec::annulus(1.0, 4.0), 3, 64);
  const auto ha = radial_boundary_mean_curvature(ann);
  REQUIRE(ha.size() == 2);
  CHECK(ha[0] == -1.0);
  CHECK(ha[1] == 0.25);
}
