#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bridgelab/duality.hpp"
#include "bridgelab/marginals.hpp"
#include "bridgelab/numerics.hpp"

using namespace bridgelab;

namespace {

struct Setup {
  Grid grid;
  ReferenceProcess ref;
  Marginal mu, nu;
  SolverConfig cfg;
};

Setup make_setup(int n = 401) {
  Setup s;
  s.grid = make_grid(-8.0, 8.0, n);
  s.ref = build_reference(s.grid, 1.0, ou_potential(1.0), Backend::kOuExact);
  s.mu = gaussian_marginal(s.ref, 1.0, 0.25, Window{3.5, 4.5});
  s.nu = gaussian_marginal(s.ref, -1.0, 0.25, Window{3.5, 4.5});
  s.cfg.tol = 1e-12;
  return s;
}

GridFunction linear(const Grid& g, double slope) {
  GridFunction phi(g.n);
  for (int i = 0; i < g.n; ++i) phi[i] = slope * g.points[i];
  return phi;
}

}  // namespace

TEST_CASE("hopf operator: constants, closed form, monotonicity") {
  Setup s = make_setup(801);
  GridFunction c(s.grid.n, -0.4);
  GridFunction qc = hopf_operator(s.ref, 1.0, 1.0, c);
  for (int i = 0; i < s.grid.n; ++i)
    if (std::abs(s.grid.points[i]) <= 4.0) CHECK(std::abs(qc[i] + 0.4) < 1e-10);

  // Q_1 phi for phi(x) = x: x e^{-1/2} - (1 - e^{-1})/2
  GridFunction ql = hopf_operator(s.ref, 1.0, 1.0, linear(s.grid, 1.0));
  const int i0 = s.grid.n / 2;
  const int i1 = i0 + static_cast<int>(std::lround(1.0 / s.grid.h));
  CHECK(ql[i0] == doctest::Approx(-0.3160603).epsilon(1e-5));
  CHECK(ql[i1] == doctest::Approx(0.2904708).epsilon(1e-5));

  Rng rng(7);
  GridFunction phi1(s.grid.n), phi2(s.grid.n);
  for (int i = 0; i < s.grid.n; ++i) {
    phi1[i] = std::sin(s.grid.points[i]);
    phi2[i] = phi1[i] + 0.1 + 0.1 * std::cos(s.grid.points[i]);
  }
  GridFunction q1 = hopf_operator(s.ref, 1.0, 1.0, phi1);
  GridFunction q2 = hopf_operator(s.ref, 1.0, 1.0, phi2);
  for (int i = 0; i < s.grid.n; ++i) CHECK(q1[i] <= q2[i] + 1e-12);

  GridFunction bad(s.grid.n, 0.0);
  bad[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(hopf_operator(s.ref, 1.0, 1.0, bad), std::invalid_argument);
  CHECK_THROWS_AS(hopf_operator(s.ref, 1.0, 0.0, phi1), std::invalid_argument);
}

TEST_CASE("weak and strong duality") {
  Setup s = make_setup();
  MDensity m0 = s.ref.stationary_density();
  GridFunction zero(s.grid.n, 0.0);
  CHECK(std::abs(dual_value(m0, m0, s.ref, 1.0, zero)) < 1e-10);

  Rng rng(9);
  std::vector<GridFunction> tests;
  for (int k = 0; k < 20; ++k) {
    GridFunction phi(s.grid.n);
    const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(0.3, 2.0);
    const double c = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < s.grid.n; ++i)
      phi[i] = a * std::sin(b * s.grid.points[i] + c);
    tests.push_back(std::move(phi));
  }
  DualReport rep = dual_report(s.mu.density, s.nu.density, s.ref, 1.0, s.cfg, tests);
  for (double gap : rep.gaps) CHECK(gap >= -1e-6);
  CHECK(std::abs(rep.primal - rep.dual_at_star) <= 1e-6 * (1.0 + std::abs(rep.primal)));
}

TEST_CASE("exponential form of the Talagrand inequality and its threshold") {
  Setup s = make_setup();

  GridFunction c(s.grid.n, 0.8);
  ExpExpSides eq = exp_exp_check(s.ref, 1.0, 2.0, c);
  CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-12));

  const double cstar1 = 1.0 / -std::expm1(-1.0);
  CHECK(cstar1 == doctest::Approx(1.581977).epsilon(1e-6));
  ExpExpSides at = exp_exp_check(s.ref, 1.0, cstar1, linear(s.grid, 1.0));
  CHECK(std::abs(at.lhs - at.rhs) / at.rhs < 1e-6);
  ExpExpSides below = exp_exp_check(s.ref, 1.0, 0.9 * cstar1, linear(s.grid, 1.0));
  CHECK(below.lhs > below.rhs);

  for (double T : {1.0, 3.0}) {
    const double cstar = 1.0 / -std::expm1(-T);
    std::vector<double> Cs;
    for (int k = -20; k <= 20; ++k) Cs.push_back(cstar * (1.0 + 0.005 * k));
    SharpnessScan scan = talagrand_sharpness_scan(s.ref, T, Cs);
    CHECK(std::abs(scan.threshold - cstar) / cstar <= 0.02);
  }
  CHECK(1.0 / -std::expm1(-3.0) == doctest::Approx(1.052396).epsilon(1e-6));
  // T -> infinity: the critical constant approaches 1
  CHECK(1.0 / -std::expm1(-40.0) == doctest::Approx(1.0).epsilon(1e-12));
}
