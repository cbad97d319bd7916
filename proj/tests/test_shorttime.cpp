#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bridgelab/marginals.hpp"
#include "bridgelab/shorttime.hpp"

using namespace bridgelab;

namespace {

struct Setup {
  Grid grid;
  ReferenceProcess ref;
  Marginal mu, nu;
  SolverConfig cfg;
};

Setup make_setup(int n = 801) {
  Setup s;
  s.grid = make_grid(-8.0, 8.0, n);
  s.ref = build_reference(s.grid, 1.0, ou_potential(1.0), Backend::kOuExact);
  s.mu = gaussian_marginal(s.ref, 1.0, 0.25);
  s.nu = gaussian_marginal(s.ref, -1.0, 0.25);
  s.cfg.tol = 1e-12;
  return s;
}

std::vector<double> tgrid(int k) {
  std::vector<double> t(k);
  for (int i = 0; i < k; ++i) t[i] = static_cast<double>(i) / (k - 1);
  return t;
}

}  // namespace

TEST_CASE("wasserstein2_1d: identity, Gaussian closed form, translation") {
  Setup s = make_setup();
  CHECK(wasserstein2_1d(s.mu.density, s.mu.density, s.ref) < 1e-12);
  CHECK(std::abs(wasserstein2_1d(s.mu.density, s.nu.density, s.ref) - 4.0) < 1e-3);
  Marginal a = gaussian_marginal(s.ref, 1.4, 0.25);
  Marginal b = gaussian_marginal(s.ref, -0.6, 0.25);
  CHECK(std::abs(wasserstein2_1d(a.density, b.density, s.ref) -
                 wasserstein2_1d(s.mu.density, s.nu.density, s.ref)) < 1e-6);
}

TEST_CASE("displacement geodesic: endpoints, Gaussian law, mass, Fisher") {
  Setup s = make_setup();
  GeodesicCurve curve = displacement_geodesic(s.mu.density, s.nu.density, s.ref,
                                              tgrid(33));
  for (int i = 0; i < s.grid.n; ++i) {
    CHECK(curve.densities.front().values[i] == s.mu.density.values[i]);
    CHECK(curve.densities.back().values[i] == s.nu.density.values[i]);
  }
  // equal-variance pair: the t = 1/2 slice is N(0, 0.25)
  Marginal mid = gaussian_marginal(s.ref, 0.0, 0.25);
  double l1 = 0.0;
  for (int i = 0; i < s.grid.n; ++i)
    l1 += std::abs(curve.densities[16].values[i] - mid.density.values[i]) * s.ref.m()[i];
  CHECK(l1 < 2e-3);
  CHECK(std::abs(integrate(curve.densities[16].values, s.ref.m()) - 1.0) < 1e-6);

  // Fisher along this geodesic is 2.25 + (1-2t)^2 integrated over t
  CHECK(curve.fisher_integral0 == doctest::Approx(2.25 + 1.0 / 3.0).epsilon(5e-3));

  GeodesicCurve still = displacement_geodesic(s.mu.density, s.mu.density, s.ref,
                                              tgrid(17));
  const double fmu = fisher_information(s.grid, s.mu.density, s.ref.m());
  CHECK(std::abs(still.fisher_integral0 - fmu) < 1e-3 * (1.0 + fmu));

  // disconnected support is rejected
  MDensity split = s.mu.density;
  for (int i = 0; i < s.grid.n; ++i)
    if (std::abs(s.grid.points[i]) < 0.2) split.values[i] = 0.0;
  CHECK_THROWS_AS(displacement_geodesic(split, s.nu.density, s.ref, tgrid(9)),
                  std::invalid_argument);
}

TEST_CASE("smoothing bias shrinks under grid refinement") {
  Setup coarse = make_setup(401), fine = make_setup(801);
  GeodesicCurve c = displacement_geodesic(coarse.mu.density, coarse.nu.density,
                                          coarse.ref, tgrid(17));
  GeodesicCurve f = displacement_geodesic(fine.mu.density, fine.nu.density, fine.ref,
                                          tgrid(17));
  CHECK(std::abs(f.fisher_integral0 - c.fisher_integral0) < 0.02 * c.fisher_integral0);
}

TEST_CASE("short-time sandwich bound") {
  Setup s = make_setup();
  GeodesicCurve geo = displacement_geodesic(s.mu.density, s.nu.density, s.ref,
                                            tgrid(33));
  for (double T : {0.05, 0.1, 0.2}) {
    ShorttimeBound b = check_shorttime_bound(s.mu.density, s.nu.density, s.ref, T,
                                             s.cfg, &geo);
    CHECK(b.mid >= -1e-3 * b.upper);
    CHECK(b.mid <= b.upper + 1e-3 * b.upper);
  }
  // the lower side rescales to (H+H)/2 as T -> 0
  ShorttimeBound tiny = check_shorttime_bound(s.mu.density, s.nu.density, s.ref, 0.02,
                                              s.cfg, &geo);
  const double half_sum = 0.5 * (s.mu.entropy + s.nu.entropy);
  CHECK(std::abs(tiny.mid / 0.02 - half_sum) <= 0.05 * half_sum);
}

TEST_CASE("taylor fit recovers the three coefficients") {
  Setup s = make_setup();
  GeodesicCurve geo = displacement_geodesic(s.mu.density, s.nu.density, s.ref,
                                            tgrid(33));
  auto [a, b, c] = taylor_fit(s.mu.density, s.nu.density, s.ref,
                              {0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16}, s.cfg);
  CHECK(std::abs(a - 0.5 * geo.w2sq) <= 0.02 * 0.5 * geo.w2sq);
  const double bref = 0.5 * (s.mu.entropy + s.nu.entropy);
  CHECK(std::abs(b - bref) <= 0.02 * bref);
  CHECK(std::abs(c - geo.fisher_integral0 / 8.0) <= 0.10 * geo.fisher_integral0 / 8.0);

  CHECK_THROWS_AS(
      taylor_fit(s.mu.density, s.nu.density, s.ref, {0.1, 0.1, 0.1, 0.1, 0.1}, s.cfg),
      std::invalid_argument);
}

TEST_CASE("rescaled cost dominates half the squared distance; energy scaling") {
  Setup s = make_setup();
  GeodesicCurve geo = displacement_geodesic(s.mu.density, s.nu.density, s.ref,
                                            tgrid(17));
  for (double T : {0.05, 0.3, 1.0}) {
    SchrodingerPair p = sinkhorn_solve(s.mu.density, s.nu.density, T, s.ref, s.cfg);
    CHECK(T * entropic_cost(p) >= 0.5 * geo.w2sq - 1e-9);
    CHECK(fisher_integral(p, 33) <= geo.fisher_integral0 * 1.05);
  }
  SchrodingerPair p = sinkhorn_solve(s.mu.density, s.nu.density, 0.05, s.ref, s.cfg);
  const double e = energy(p, 0.5);
  CHECK(std::abs(0.05 * 0.05 * e - 0.5 * geo.w2sq) <= 0.1 * 0.5 * geo.w2sq);
}
