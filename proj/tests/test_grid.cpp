#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bridgelab/grid.hpp"
#include "bridgelab/marginals.hpp"
#include "bridgelab/numerics.hpp"
#include "bridgelab/reference.hpp"

using namespace bridgelab;

namespace {
// closed-form oracles for Gaussian data relative to m = N(0, 1/kappa)
double gaussian_entropy_oracle(double kappa, double s2) {
  return 0.5 * (kappa * s2 - 1.0 - std::log(kappa * s2));
}
double gaussian_fisher_oracle(double kappa, double s2) {
  const double d = kappa - 1.0 / s2;
  return d * d * s2;
}
}  // namespace

TEST_CASE("make_grid basics and rejection") {
  Grid g = make_grid(-5.0, 5.0, 11);
  CHECK(g.h == doctest::Approx(1.0));
  for (int i = 0; i < 11; ++i) CHECK(g.points[i] == doctest::Approx(-5.0 + i));
  double qsum = 0.0;
  for (double q : g.quad) qsum += q;
  CHECK(qsum == doctest::Approx(10.0));

  CHECK_THROWS_AS(make_grid(1.0, 0.0, 11), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 2), std::invalid_argument);
}

TEST_CASE("quadrature of constants and Gaussian second moment") {
  Grid g = make_grid(0.0, 1.0, 101);
  std::vector<double> ones(g.n, 1.0);
  CHECK(integrate(ones, g.quad) == doctest::Approx(1.0).epsilon(1e-14));

  Grid gg = make_grid(-8.0, 8.0, 1601);
  std::vector<double> f(gg.n);
  for (int i = 0; i < gg.n; ++i) {
    const double x = gg.points[i];
    f[i] = x * x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  }
  CHECK(std::abs(integrate(f, gg.quad) - 1.0) < 1e-6);
}

TEST_CASE("quadrature is exact on affine functions and O(h^2) on C^2") {
  Grid g = make_grid(0.0, 1.0, 17);
  std::vector<double> aff(g.n);
  for (int i = 0; i < g.n; ++i) aff[i] = 2.0 * g.points[i] - 0.7;
  CHECK(integrate(aff, g.quad) == doctest::Approx(1.0 - 0.7).epsilon(1e-14));

  auto quad_err = [](int n) {
    Grid gr = make_grid(0.0, 1.0, n);
    std::vector<double> f(gr.n);
    for (int i = 0; i < gr.n; ++i) f[i] = std::pow(gr.points[i], 4);
    return std::abs(integrate(f, gr.quad) - 0.2);
  };
  const double e1 = quad_err(65), e2 = quad_err(129);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.9);
}

TEST_CASE("integrate_m against the OU invariant measure") {
  Grid g = make_grid(-8.0, 8.0, 801);
  ReferenceProcess ref = build_reference(g, 1.0, ou_potential(1.0), Backend::kOuExact);
  std::vector<double> ones(g.n, 1.0);
  CHECK(integrate(ones, ref.m()) == doctest::Approx(1.0).epsilon(1e-13));
  std::vector<double> cs(g.n, -3.25);
  CHECK(integrate(cs, ref.m()) == doctest::Approx(-3.25).epsilon(1e-13));
  CHECK(std::abs(integrate(g.points, ref.m())) < 1e-8);

  std::vector<double> wrong(g.n - 1, 1.0);
  CHECK_THROWS_AS(integrate(wrong, ref.m()), std::invalid_argument);
}

TEST_CASE("grad: quadratics, constants, affine slopes, sine accuracy") {
  Grid g = make_grid(-2.0, 2.0, 21);
  std::vector<double> f(g.n), c(g.n, 4.2), aff(g.n);
  for (int i = 0; i < g.n; ++i) {
    f[i] = g.points[i] * g.points[i];
    aff[i] = 1.5 * g.points[i] + 2.0;
  }
  GridFunction df = grad(g, f), dc = grad(g, c), da = grad(g, aff);
  for (int i = 1; i < g.n - 1; ++i)
    CHECK(df[i] == doctest::Approx(2.0 * g.points[i]).epsilon(1e-12));
  for (int i = 0; i < g.n; ++i) {
    CHECK(std::abs(dc[i]) < 1e-13);
    CHECK(da[i] == doctest::Approx(1.5).epsilon(1e-12));
  }

  Grid gs = make_grid(-M_PI, M_PI, 2001);
  std::vector<double> s(gs.n);
  for (int i = 0; i < gs.n; ++i) s[i] = std::sin(gs.points[i]);
  GridFunction ds = grad(gs, s);
  double maxerr = 0.0;
  for (int i = 0; i < gs.n; ++i)
    maxerr = std::max(maxerr, std::abs(ds[i] - std::cos(gs.points[i])));
  CHECK(maxerr <= 1e-5);
}

TEST_CASE("relative entropy: zero at m, Gaussian value, non-negative") {
  Grid g = make_grid(-8.0, 8.0, 801);
  ReferenceProcess ref = build_reference(g, 1.0, ou_potential(1.0), Backend::kOuExact);

  MDensity unit = ref.stationary_density();
  CHECK(std::abs(relative_entropy(unit, ref.m())) < 1e-14);

  Marginal nar = gaussian_marginal(ref, 0.0, 0.25);
  CHECK(relative_entropy(nar.density, ref.m()) ==
        doctest::Approx(gaussian_entropy_oracle(1.0, 0.25)).epsilon(1e-4));

  Rng rng(7);
  for (int k = 0; k < 8; ++k) {
    Marginal r = random_mixture(ref, rng);
    CHECK(relative_entropy(r.density, ref.m()) >= 0.0);
  }

  MDensity bad{std::vector<double>(g.n, 1.0)};
  bad.values[3] = -0.1;
  CHECK_THROWS_AS(relative_entropy(bad, ref.m()), std::invalid_argument);
}

TEST_CASE("relative entropy vanishes only at the stationary density") {
  Grid g = make_grid(-8.0, 8.0, 401);
  ReferenceProcess ref = build_reference(g, 1.0, ou_potential(1.0), Backend::kOuExact);
  Marginal close = gaussian_marginal(ref, 0.0, 0.999);
  CHECK(relative_entropy(close.density, ref.m()) > 1e-12);
  CHECK(std::abs(relative_entropy(ref.stationary_density(), ref.m())) < 1e-12);
}

TEST_CASE("fisher information: zero at m, Gaussian value, scaling invariance") {
  Grid g = make_grid(-8.0, 8.0, 801);
  ReferenceProcess ref = build_reference(g, 1.0, ou_potential(1.0), Backend::kOuExact);

  CHECK(std::abs(fisher_information(g, ref.stationary_density(), ref.m())) < 1e-20);

  Marginal nar = gaussian_marginal(ref, 0.0, 0.25);
  const double oracle = gaussian_fisher_oracle(1.0, 0.25);
  CHECK(fisher_information(g, nar.density, ref.m()) ==
        doctest::Approx(oracle).epsilon(0.01));

  // grad log(c rho) == grad log(rho)
  std::vector<double> lr(g.n), lcr(g.n);
  for (int i = 0; i < g.n; ++i) {
    lr[i] = std::log(nar.density.values[i] + 1e-300);
    lcr[i] = std::log(10.0) + lr[i];
  }
  GridFunction d1 = grad(g, lr), d2 = grad(g, lcr);
  for (int i = 0; i < g.n; ++i) CHECK(d1[i] == doctest::Approx(d2[i]).epsilon(1e-12));
}

TEST_CASE("mdensity validation") {
  Grid g = make_grid(-8.0, 8.0, 101);
  ReferenceProcess ref = build_reference(g, 1.0, ou_potential(1.0), Backend::kOuExact);
  std::vector<double> v(g.n, 1.0);
  CHECK_NOTHROW(make_mdensity(v, ref.m()));
  v[0] = -1.0;
  CHECK_THROWS_AS(make_mdensity(v, ref.m()), std::invalid_argument);
  std::vector<double> w(g.n, 1.02);
  CHECK_THROWS_AS(make_mdensity(w, ref.m()), std::invalid_argument);
}
