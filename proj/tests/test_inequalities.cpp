#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bridgelab/inequalities.hpp"
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
  s.cfg.tol = 1e-11;
  return s;
}

}  // namespace

TEST_CASE("entropic talagrand inequality and its coefficients") {
  Setup s = make_setup();
  SolvedInstance inst = solve_instance(s.mu.density, s.nu.density, 1.0, s.ref, s.cfg);

  // coefficient at t = 1/2: 1/(1 - e^{-1/2})
  const double coef = 1.0 / -std::expm1(-0.5);
  CHECK(coef == doctest::Approx(2.541494).epsilon(1e-6));
  PairSides mid = check_talagrand(inst, 0.5);
  CHECK(mid.rhs == doctest::Approx(coef * (inst.h_mu + inst.h_nu)).epsilon(1e-12));
  for (double t : {0.25, 0.5, 0.75}) {
    PairSides ps = check_talagrand(inst, t);
    CHECK(ps.lhs <= ps.rhs + inequality_slack(ps.rhs));
  }

  // nu = m and t -> 1: reduces to the single-marginal form 1/(1 - e^{-kT})
  MDensity m0 = s.ref.stationary_density();
  SolvedInstance one_sided = solve_instance(s.mu.density, m0, 1.0, s.ref, s.cfg);
  PairSides near_one = check_talagrand(one_sided, 0.999999);
  const double single = inst.h_mu / -std::expm1(-1.0);
  CHECK(near_one.rhs == doctest::Approx(single).epsilon(1e-4));
  CHECK(one_sided.cost <= single + inequality_slack(single));
}

TEST_CASE("energy-transport inequality, including the kappa = 0 variant") {
  Setup s = make_setup();
  for (double T : {0.5, 1.0, 2.0, 4.0}) {
    SolvedInstance inst = solve_instance(s.mu.density, s.nu.density, T, s.ref, s.cfg);
    PairSides ps = check_energy_transport(inst);
    CHECK(ps.lhs <= ps.rhs + 1e-6);
  }
  MDensity m0 = s.ref.stationary_density();
  SolvedInstance triv = solve_instance(m0, m0, 1.0, s.ref, s.cfg);
  PairSides z = check_energy_transport(triv);
  CHECK(std::abs(z.lhs) < 1e-10);
  CHECK(std::abs(z.rhs) < 1e-5);

  // kappa = 0 plumbing mode on a flat interval reference
  Grid gu = make_grid(-2.0, 2.0, 321);
  ReferenceProcess flat = build_reference(
      gu, 0.0, tabulated_potential(0.0, GridFunction(gu.n, 0.0)), Backend::kSpectral);
  std::vector<double> raw(gu.n), raw2(gu.n);
  for (int i = 0; i < gu.n; ++i) {
    raw[i] = 1.0 + 0.5 * std::sin(1.3 * gu.points[i]);
    raw2[i] = 1.0 + 0.4 * std::cos(0.9 * gu.points[i]);
  }
  double s1 = integrate(raw, flat.m()), s2 = integrate(raw2, flat.m());
  for (int i = 0; i < gu.n; ++i) {
    raw[i] /= s1;
    raw2[i] /= s2;
  }
  SolverConfig fc;
  fc.tol = 1e-11;
  SolvedInstance finst = solve_instance(MDensity{raw}, MDensity{raw2}, 1.0, flat, fc);
  PairSides fps = check_energy_transport(finst);
  CHECK(fps.lhs <= fps.rhs + 1e-6);
}

TEST_CASE("cost-energy bound and its short-time saturation") {
  Setup s = make_setup();
  double prev_margin_rel = -1.0;
  for (double T : {1.0, 0.3, 0.1}) {
    SolvedInstance inst = solve_instance(s.mu.density, s.nu.density, T, s.ref, s.cfg);
    PairSides ps = check_cost_energy_bound(inst);
    CHECK(ps.lhs <= ps.rhs + 1e-6);
    const double margin_rel = (ps.rhs - ps.lhs) / inst.cost;
    if (prev_margin_rel >= 0.0) CHECK(margin_rel <= prev_margin_rel);
    prev_margin_rel = margin_rel;
  }
}

TEST_CASE("distorted convexity along the interpolation") {
  Setup s = make_setup();
  SolvedInstance inst = solve_instance(s.mu.density, s.nu.density, 1.0, s.ref, s.cfg);
  std::vector<double> tg;
  for (int q = 1; q <= 9; ++q) tg.push_back(q / 10.0);
  for (const PairSides& ps : check_kconvexity(inst, tg))
    CHECK(ps.lhs <= ps.rhs + 1e-4);

  // t = 0 and t = 1 reduce to equalities between endpoint entropies
  auto ends = check_kconvexity(inst, {0.0, 1.0});
  CHECK(ends[0].rhs == doctest::Approx(inst.h_mu).epsilon(1e-9));
  CHECK(ends[1].rhs == doctest::Approx(inst.h_nu).epsilon(1e-9));
}

TEST_CASE("log-Sobolev inequality") {
  Setup s = make_setup();
  MDensity m0 = s.ref.stationary_density();
  PairSides triv = check_logsob(m0, s.ref);
  CHECK(std::abs(triv.lhs) < 1e-12);
  CHECK(std::abs(triv.rhs) < 1e-12);

  Marginal g = gaussian_marginal(s.ref, 0.0, 0.5);
  PairSides ps = check_logsob(g.density, s.ref);
  CHECK(ps.lhs == doctest::Approx(0.5 * (0.5 - 1.0 - std::log(0.5))).epsilon(1e-3));
  CHECK(ps.rhs == doctest::Approx(0.25).epsilon(1e-2));
  CHECK(ps.lhs <= ps.rhs);

  Rng rng(17);
  for (int k = 0; k < 20; ++k) {
    Marginal r = random_mixture(s.ref, rng);
    PairSides q = check_logsob(r.density, s.ref);
    CHECK(q.lhs <= q.rhs + inequality_slack(q.rhs));
  }
}

TEST_CASE("long-time bounds: displayed values and dominance") {
  Setup s = make_setup();
  // evaluate the simple bound at T = 4 for the entropies of the N(0, 1/4) pair
  const double h = 0.5 * (0.25 - 1.0 - std::log(0.25));
  const double rhs = 2.0 / std::expm1(2.0) * (2.0 * h);
  CHECK(rhs == doctest::Approx(0.199176).epsilon(1e-4));

  auto rows = check_longtime_bounds(s.mu.density, s.nu.density, s.ref,
                                    {1, 2, 3, 4, 5, 6, 7, 8}, s.cfg);
  for (const auto& r : rows) {
    CHECK(r.gap <= r.simple + 1e-6 + 1e-3 * r.simple);
    CHECK(r.gap <= r.stronger + 1e-6 + 1e-3 * r.stronger);
    CHECK(r.abs_energy <= r.e_simple + 1e-6 + 1e-3 * r.e_simple);
    CHECK(r.abs_energy <= r.e_stronger + 1e-6 + 1e-3 * r.e_stronger);
    CHECK(r.stronger <= r.simple + 1e-12);
    CHECK(r.e_stronger <= r.e_simple + 1e-12);
  }
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k].T > 2.0) CHECK(rows[k].gap <= rows[k - 1].gap + 1e-9);
}

TEST_CASE("long-time limits of cost, decomposition and coupling") {
  Setup s = make_setup();
  Marginal mz = gaussian_marginal(s.ref, 0.0, 0.25, Window{3.5, 4.5});
  Marginal nz = gaussian_marginal(s.ref, 0.0, 0.49, Window{3.5, 4.5});
  LongtimeLimitReport rep = check_limit_longtime(mz.density, nz.density, s.ref,
                                                 {4.0, 8.0, 12.0}, s.cfg);
  CHECK(rep.gaps[2] <= 1e-3);
  CHECK(rep.gaps[2] <= rep.gaps[1]);
  CHECK(rep.gaps[1] <= rep.gaps[0]);
  CHECK(rep.f_l1 <= 1e-3);
  CHECK(rep.g_l1 <= 1e-3);
  CHECK(rep.pf_l1 <= 1e-3);
  CHECK(rep.coupling_product_l1 <= 1e-3);
}

TEST_CASE("sharpness of the long-time rate") {
  Grid g = make_grid(-8.0, 8.0, 401);
  ReferenceProcess ref = build_reference(g, 1.0, ou_potential(1.0), Backend::kOuExact);
  SolverConfig cfg;
  cfg.tol = 1e-12;
  Marginal mu = moment_matched_marginal(ref, 1.0, 1.3, false);
  Marginal nu = moment_matched_marginal(ref, -1.0, 1.3, false);
  CHECK(mu.mean == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(nu.mean == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(mu.second_moment == doctest::Approx(1.3).epsilon(1e-7));

  std::vector<double> Ts;
  for (double T = 3.0; T <= 9.01; T += 0.75) Ts.push_back(T);
  SharpnessResult res = sharpness_experiment(ref, Ts, mu, nu, cfg);
  CHECK(res.fitted_slope >= -0.60);
  CHECK(res.fitted_slope <= -0.45);
  // |beta(T)| <= C e^{-kappa T}
  for (std::size_t k = 0; k < res.Ts.size(); ++k)
    CHECK(std::abs(res.betas[k]) <= 3.0 * std::exp(-res.Ts[k]));

  Marginal m0 = moment_matched_marginal(ref, 0.0, 1.3, true);
  Marginal n0 = moment_matched_marginal(ref, 0.0, 1.3, false);
  SharpnessResult ctrl = sharpness_experiment(ref, Ts, m0, n0, cfg);
  CHECK(ctrl.fitted_slope <= -0.9);
  CHECK(res.fitted_slope > ctrl.fitted_slope);
}
