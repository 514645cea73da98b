#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "curvrig/domain.hpp"
#include "curvrig/errors.hpp"
#include "curvrig/operators.hpp"
#include "curvrig/spectral.hpp"
#include "oracles.hpp"

using namespace curvrig;
using std::numbers::pi;

namespace {

EigenResult cap_pair(int n, double theta0, std::size_t m) {
  return dirichlet_lambda1(DiscreteDomain::radial(RadialSpec::cap(theta0), n, m));
}

}  // namespace

TEST_CASE("hemisphere: lambda1 = n") {
  for (int n : {2, 3, 4}) {
    CAPTURE(n);
    const auto eig = cap_pair(n, pi / 2, 512);
    CHECK(std::abs(eig.lambda1 - n) / n < 1e-5);
  }
}

TEST_CASE("S^3 caps match (pi/theta0)^2 - 1") {
  for (double t : {0.4, 0.8, 1.2, 1.5}) {
    CAPTURE(t);
    const auto eig = cap_pair(3, t, 512);
    const double exact = oracle::s3_cap_lambda1(t);
    CHECK(std::abs(eig.lambda1 - exact) / exact < 1e-5);
  }
}

TEST_CASE("caps strictly inside the hemisphere have lambda1 > n") {
  for (int n : {2, 3, 5}) {
    for (double t : {0.5, 1.0, 1.4, 1.55}) {
      CAPTURE(n);
      CAPTURE(t);
      CHECK(cap_pair(n, t, 256).lambda1 > n);
    }
  }
}

TEST_CASE("unit disk: Bessel oracle") {
  const auto eig = dirichlet_lambda1(DiscreteDomain::radial(RadialSpec::ball(1.0), 2, 1024));
  CHECK(eig.lambda1 == doctest::Approx(oracle::disk_lambda1()).epsilon(1e-5));
}

TEST_CASE("eigenpair invariants") {
  const DiscreteDomain domains[] = {
      DiscreteDomain::radial(RadialSpec::cap(1.2), 3, 200),
      DiscreteDomain::radial(RadialSpec::annulus(1.0, 3.0), 3, 200),
      DiscreteDomain::radial(RadialSpec::interval(0.0, 1.0), 1, 100),
      DiscreteDomain::from_mesh(disk_mesh(1.0, 8)),
      DiscreteDomain::from_mesh(unit_cube_mesh(5)),
  };
  for (const auto& d : domains) {
    CAPTURE(d.descriptor());
    const auto eig = dirichlet_lambda1(d);
    CHECK(eig.lambda1 > 0.0);
    CHECK(eig.iterations >= 1);
    for (auto b : d.boundary_nodes()) CHECK(eig.u1[b] == 0.0);
    std::size_t nonpositive = 0;
    for (auto i : d.interior_nodes()) nonpositive += eig.u1[i] > 0.0 ? 0 : 1;
    CHECK(nonpositive == 0);

    const auto ops = assemble(d);
    CHECK(ops.mass.form(eig.u1.values, eig.u1.values) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rayleigh_quotient(eig.u1, d) == doctest::Approx(eig.lambda1).epsilon(1e-9));
  }
}

TEST_CASE("rayleigh quotient") {
  SUBCASE("sin(pi x) on the unit interval tends to pi^2") {
    double prev = 0.0;
    for (std::size_t m : {64, 128, 256, 512}) {
      const auto d = DiscreteDomain::radial(RadialSpec::interval(0.0, 1.0), 1, m);
      FieldOnDomain f(m, 0.0);
      const auto x = d.coordinates();
      for (auto i : d.interior_nodes()) f[i] = std::sin(pi * x[i]);
      const double err = std::abs(rayleigh_quotient(f, d) - pi * pi);
      if (prev > 0.0) CHECK(err < prev / 3.5);
      prev = err;
    }
    CHECK(prev < 1e-3);
  }

  SUBCASE("random admissible fields stay above lambda1") {
    const auto d = DiscreteDomain::radial(RadialSpec::cap(1.0), 3, 128);
    const double l1 = dirichlet_lambda1(d).lambda1;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
      FieldOnDomain f(d.size(), 0.0);
      for (auto i : d.interior_nodes()) f[i] = dist(rng);
      CHECK(rayleigh_quotient(f, d) >= l1 * (1.0 - 1e-12));
    }
  }

  SUBCASE("errors") {
    const auto d = DiscreteDomain::radial(RadialSpec::cap(1.0), 3, 32);
    CHECK_THROWS_AS(rayleigh_quotient(FieldOnDomain(d.size(), 0.0), d), InputError);
    CHECK_THROWS_AS(rayleigh_quotient(FieldOnDomain(d.size(), 1.0), d), InputError);
    CHECK_THROWS_AS(rayleigh_quotient(FieldOnDomain(3, 0.0), d), InputError);
  }
}

TEST_CASE("domain monotonicity on nested caps and annuli") {
  // Matched spacing: every grid has h = 1/200.
  double prev = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const double t = 0.25 * k;
    const double l = cap_pair(3, t, static_cast<std::size_t>(200 * t) + 1).lambda1;
    if (k > 1) CHECK(l < prev);
    prev = l;
  }
  prev = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const double b = 1.0 + 0.5 * k;
    const auto d = DiscreteDomain::radial(RadialSpec::annulus(1.0, b), 3, static_cast<std::size_t>(200 * (b - 1.0)) + 1);
    const double l = dirichlet_lambda1(d).lambda1;
    if (k > 1) CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("flat domains: lambda1 scales as s^-2") {
  for (double s : {0.25, 0.5, 2.0, 7.0}) {
    CAPTURE(s);
    const double i1 = dirichlet_lambda1(DiscreteDomain::radial(RadialSpec::interval(0.0, 1.0), 1, 200)).lambda1;
    const double is = dirichlet_lambda1(DiscreteDomain::radial(RadialSpec::interval(0.0, s), 1, 200)).lambda1;
    CHECK(is * s * s == doctest::Approx(i1).epsilon(1e-9));
    const double d1 = dirichlet_lambda1(DiscreteDomain::radial(RadialSpec::ball(1.0), 2, 200)).lambda1;
    const double ds = dirichlet_lambda1(DiscreteDomain::radial(RadialSpec::ball(s), 2, 200)).lambda1;
    CHECK(ds * s * s == doctest::Approx(d1).epsilon(1e-9));
  }
}

TEST_CASE("dirichlet_lambda1: errors") {
  CHECK_THROWS_AS(dirichlet_lambda1(DiscreteDomain::radial(RadialSpec::sphere(), 3, 64)), InputError);

  const auto d = DiscreteDomain::radial(RadialSpec::cap(1.2), 3, 512);
  EigenOptions tight;
  tight.max_iterations = 2;
  try {
    (void)dirichlet_lambda1(d, tight);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.residual_history().size() == 2);
    CHECK(e.last_residual() > 0.0);
  }
}
