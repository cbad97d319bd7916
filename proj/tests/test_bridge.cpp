#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bridgelab/bridge.hpp"
#include "bridgelab/marginals.hpp"
#include "bridgelab/numerics.hpp"
#include "oracle_polytope.hpp"

using namespace bridgelab;

namespace {

struct Setup {
  Grid grid;
  ReferenceProcess ref;
  Marginal mu, nu;
  SolverConfig cfg;
};

Setup make_setup(int n = 401, double tol = 1e-11) {
  Setup s;
  s.grid = make_grid(-8.0, 8.0, n);
  s.ref = build_reference(s.grid, 1.0, ou_potential(1.0), Backend::kOuExact);
  s.mu = gaussian_marginal(s.ref, 1.0, 0.25, Window{3.5, 4.5});
  s.nu = gaussian_marginal(s.ref, -1.0, 0.25, Window{3.5, 4.5});
  s.cfg.tol = tol;
  return s;
}

}  // namespace

TEST_CASE("stationary marginals solve exactly") {
  Setup s = make_setup();
  MDensity m0 = s.ref.stationary_density();
  SchrodingerPair p = sinkhorn_solve(m0, m0, 1.7, s.ref, s.cfg);
  CHECK(p.status == SinkhornStatus::kConverged);
  for (int i = 0; i < s.grid.n; ++i) {
    if (std::abs(s.grid.points[i]) > 4.0) continue;
    CHECK(std::exp(p.log_f[i]) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::exp(p.log_g[i]) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(std::abs(entropic_cost(p)) < 1e-12);
  for (double t : {0.25, 0.5, 0.75}) CHECK(std::abs(energy(p, t)) < 1e-12);
  MDensity rho = interpolation(p, 0.37);
  for (int i = 0; i < s.grid.n; ++i)
    if (std::abs(s.grid.points[i]) <= 4.0)
      CHECK(rho.values[i] == doctest::Approx(1.0).epsilon(1e-8));
  GridFunction v = velocity(p, 0.37);
  for (int i = 0; i < s.grid.n; ++i)
    if (std::abs(s.grid.points[i]) <= 4.0) CHECK(std::abs(v[i]) < 1e-8);
  CHECK(std::abs(fisher_integral(p, 33)) < 1e-10);
}

TEST_CASE("coarse-grid solves match the brute-force polytope oracle") {
  Grid g5 = make_grid(-2.0, 2.0, 5);
  ReferenceProcess r5 = build_reference(g5, 1.0, ou_potential(1.0), Backend::kOuExact);
  SolverConfig cfg;
  cfg.tol = 1e-13;
  Rng rng(123);
  for (int inst = 0; inst < 10; ++inst) {
    Rng r = rng.stream(inst);
    std::vector<double> mu(5), nu(5);
    double sa = 0.0, sb = 0.0;
    for (int i = 0; i < 5; ++i) {
      mu[i] = 0.2 + r.uniform();
      nu[i] = 0.2 + r.uniform();
    }
    for (int i = 0; i < 5; ++i) {
      sa += mu[i] * r5.m()[i];
      sb += nu[i] * r5.m()[i];
    }
    for (int i = 0; i < 5; ++i) {
      mu[i] /= sa;
      nu[i] /= sb;
    }
    SchrodingerPair p = sinkhorn_solve(MDensity{mu}, MDensity{nu}, 1.0, r5, cfg);

    auto lk = r5.log_kernel_matrix(1.0);
    std::vector<double> R(25), a(5), b(5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        R[i * 5 + j] = std::exp(lk[i * 5 + j]) * r5.m()[i] * r5.m()[j];
    for (int i = 0; i < 5; ++i) {
      a[i] = mu[i] * r5.m()[i];
      b[i] = nu[i] * r5.m()[i];
    }
    auto res = oracle::minimize_entropy_over_polytope(R, a, b);
    CHECK(std::abs(entropic_cost(p) - res.value) < 1e-6);

    // the coupling itself matches entrywise
    std::vector<double> pi = coupling(p);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        CHECK(std::abs(pi[i * 5 + j] * r5.m()[i] * r5.m()[j] -
                       res.coupling[i * 5 + j]) < 1e-7);
  }
}

TEST_CASE("swap symmetry of cost and pair") {
  Setup s = make_setup();
  SchrodingerPair p = sinkhorn_solve(s.mu.density, s.nu.density, 1.0, s.ref, s.cfg);
  SchrodingerPair q = sinkhorn_solve(s.nu.density, s.mu.density, 1.0, s.ref, s.cfg);
  CHECK(std::abs(entropic_cost(p) - entropic_cost(q)) < 1e-10);
  // swapped pair is (g, f) up to the gauge constant
  double ratio = 0.0;
  bool first = true;
  for (int i = 0; i < s.grid.n; ++i) {
    if (!std::isfinite(p.log_g[i]) || !std::isfinite(q.log_f[i])) continue;
    const double d = q.log_f[i] - p.log_g[i];
    if (first) {
      ratio = d;
      first = false;
    }
    CHECK(std::abs(d - ratio) < 1e-8);
  }
}

TEST_CASE("cost representations and floor") {
  Setup s = make_setup();
  SchrodingerPair p = sinkhorn_solve(s.mu.density, s.nu.density, 1.0, s.ref, s.cfg);
  const double c = entropic_cost(p);
  CHECK(std::abs(c - entropic_cost_product_form(p)) < 1e-8);
  CHECK(c >= std::max(s.mu.entropy, s.nu.entropy) - 1e-6);
  CHECK(c == doctest::Approx(c));
}

TEST_CASE("interpolation endpoints, mass, continuity equation") {
  Setup s = make_setup();
  SchrodingerPair p = sinkhorn_solve(s.mu.density, s.nu.density, 1.0, s.ref, s.cfg);
  MDensity r0 = interpolation(p, 0.0), r1 = interpolation(p, 1.0);
  double l0 = 0.0, l1 = 0.0;
  for (int i = 0; i < s.grid.n; ++i) {
    l0 += std::abs(r0.values[i] - s.mu.density.values[i]) * s.ref.m()[i];
    l1 += std::abs(r1.values[i] - s.nu.density.values[i]) * s.ref.m()[i];
  }
  CHECK(l0 < 100.0 * s.cfg.tol);
  CHECK(l1 < 100.0 * s.cfg.tol);
  MDensity rm = interpolation(p, 0.37);
  CHECK(std::abs(integrate(rm.values, s.ref.m()) - 1.0) < 1e-8);

  GridFunction v = velocity(p, 0.3);
  MDensity r3 = interpolation(p, 0.3);
  const double dt = 1e-2;
  MDensity rp = interpolation(p, 0.3 + dt), rmn = interpolation(p, 0.3 - dt);
  double lhs = 0.0, rhs = 0.0;
  for (int i = 0; i < s.grid.n; ++i) {
    lhs += s.grid.points[i] * (rp.values[i] - rmn.values[i]) * s.ref.m()[i];
    rhs += v[i] * r3.values[i] * s.ref.m()[i];
  }
  CHECK(std::abs(lhs / (2.0 * dt) - rhs) < 1e-4);
}

TEST_CASE("velocity antisymmetry under swap and time reflection") {
  Setup s = make_setup();
  SchrodingerPair p = sinkhorn_solve(s.mu.density, s.nu.density, 1.0, s.ref, s.cfg);
  SchrodingerPair q = sinkhorn_solve(s.nu.density, s.mu.density, 1.0, s.ref, s.cfg);
  GridFunction vp = velocity(p, 0.3), vq = velocity(q, 0.7);
  MDensity rho = interpolation(p, 0.3);
  for (int i = 0; i < s.grid.n; ++i)
    CHECK(std::abs(vp[i] + vq[i]) * rho.values[i] < 1e-8);
}

TEST_CASE("energy: conservation, both forms, sign at large T") {
  Setup s = make_setup(801, 1e-11);
  for (double T : {0.5, 1.0, 2.0, 4.0}) {
    SchrodingerPair p = sinkhorn_solve(s.mu.density, s.nu.density, T, s.ref, s.cfg);
    double emin = 1e300, emax = -1e300, emid = energy(p, 0.5);
    for (int k = 1; k <= 9; ++k) {
      const double e = energy(p, k / 10.0);
      emin = std::min(emin, e);
      emax = std::max(emax, e);
    }
    CHECK(emax - emin <= 1e-5 * (1.0 + std::abs(emid)));
    auto [f1, f2] = energy_both_forms(p, 0.37);
    CHECK(std::abs(f1 - f2) <= 1e-6 * (1.0 + std::abs(f1)));
    CHECK(std::abs(energy(p, 0.25) - energy(p, 0.75)) <=
          1e-6 * (1.0 + std::abs(emid)));
  }

  // same-side well-separated means: Fisher part dominates at large T
  Marginal a = gaussian_marginal(s.ref, 1.0, 0.25, Window{3.5, 4.5});
  Marginal b = gaussian_marginal(s.ref, 2.5, 0.25, Window{3.5, 4.5});
  SchrodingerPair pl = sinkhorn_solve(a.density, b.density, 6.0, s.ref, s.cfg);
  CHECK(energy(pl, 0.5) < 0.0);
}

TEST_CASE("fisher integral: T-monotone and the action identity") {
  Setup s = make_setup();
  SchrodingerPair p1 = sinkhorn_solve(s.mu.density, s.nu.density, 1.0, s.ref, s.cfg);
  SchrodingerPair p2 = sinkhorn_solve(s.mu.density, s.nu.density, 2.0, s.ref, s.cfg);
  CHECK(fisher_integral(p2, 33) <= fisher_integral(p1, 33));

  const double H2 = s.mu.entropy + s.nu.entropy;
  const double act = optimal_action(p1, 129);
  const double fi = fisher_integral(p1, 129);
  const double c = entropic_cost(p1);
  CHECK(std::abs(c - 0.5 * H2 - act) <= 1e-4 * std::abs(c));
  // and the Fisher part is consistent with T E = C - H/2 - H/2 - (T/4) FI
  const double E = energy(p1, 0.5);
  CHECK(std::abs(1.0 * E - (c - 0.5 * H2 - 0.25 * fi)) <= 1e-4 * (1.0 + std::abs(E)));
}

TEST_CASE("action: zero curve and curve optimality") {
  Setup s = make_setup();
  const int nt = 17;
  std::vector<CurveSample> constant(nt);
  for (int k = 0; k < nt; ++k) {
    constant[k].rho = s.ref.stationary_density();
    constant[k].v.assign(s.grid.n, 0.0);
  }
  CHECK(std::abs(action(s.grid, s.ref.m(), constant, 1.0)) < 1e-14);

  BridgeSolution sol = solve_bridge(s.mu.density, s.nu.density, 1.0, s.ref, s.cfg);
  std::vector<CurveSample> mix(nt);
  for (int k = 0; k < nt; ++k) {
    const double t = static_cast<double>(k) / (nt - 1);
    mix[k].rho.values.resize(s.grid.n);
    double mass = 0.0;
    for (int i = 0; i < s.grid.n; ++i) {
      mix[k].rho.values[i] =
          (1.0 - t) * s.mu.density.values[i] + t * s.nu.density.values[i];
      mass += mix[k].rho.values[i] * s.ref.m()[i];
    }
    for (double& w : mix[k].rho.values) w /= mass;
    mix[k].v.assign(s.grid.n, 0.0);
    double acc = 0.0;
    for (int i = 0; i < s.grid.n; ++i) {
      acc += (s.nu.density.values[i] - s.mu.density.values[i]) * s.ref.m()[i];
      const double leb = mix[k].rho.values[i] * s.ref.m()[i];
      mix[k].v[i] = leb > 1e-14 ? -acc / leb * s.grid.quad[i] : 0.0;
    }
  }
  CHECK(action(s.grid, s.ref.m(), mix, 1.0) >= sol.action - 1e-6);
}

TEST_CASE("gauge invariance of cost and interpolation") {
  Setup s = make_setup();
  SchrodingerPair p = sinkhorn_solve(s.mu.density, s.nu.density, 1.0, s.ref, s.cfg);
  const double c0 = entropic_cost(p);
  MDensity r0 = interpolation(p, 0.37);
  for (double scale : {0.1, 10.0}) {
    SchrodingerPair q = p;
    const double lc = std::log(scale);
    for (int i = 0; i < s.grid.n; ++i) {
      if (std::isfinite(q.log_f[i])) q.log_f[i] += lc;
      if (std::isfinite(q.log_g[i])) q.log_g[i] -= lc;
    }
    std::vector<double> gv(s.grid.n);
    for (int i = 0; i < s.grid.n; ++i)
      gv[i] = std::isfinite(q.log_g[i]) ? q.log_g[i] + s.ref.log_m()[i] : kNegInf;
    const double logc = logsumexp(gv);
    for (int i = 0; i < s.grid.n; ++i) {
      if (std::isfinite(q.log_g[i])) q.log_g[i] -= logc;
      if (std::isfinite(q.log_f[i])) q.log_f[i] += logc;
    }
    CHECK(std::abs(entropic_cost(q) - c0) < 1e-10);
    MDensity r1 = interpolation(q, 0.37);
    for (int i = 0; i < s.grid.n; ++i)
      CHECK(std::abs(r1.values[i] - r0.values[i]) < 1e-10);
  }
}

TEST_CASE("solver edge cases: max-iter status, degenerate kernel, bad input") {
  Setup s = make_setup();
  SolverConfig strict;
  strict.tol = 1e-30;
  strict.max_iter = 5;
  SchrodingerPair p =
      sinkhorn_solve(s.mu.density, s.nu.density, 0.3, s.ref, strict);
  CHECK(p.status == SinkhornStatus::kMaxIterExceeded);
  CHECK(p.iterations == 5);
  CHECK(p.residual > 0.0);
  CHECK(p.residual_history.size() == 5);
  for (std::size_t k = 1; k < p.residual_history.size(); ++k)
    CHECK(p.residual_history[k] <= p.residual_history[k - 1] * (1.0 + 1e-9));

  // structurally disconnected kernel: mass vanishes on supp(a)
  std::vector<double> logk = {0.0, kNegInf, kNegInf, 0.0};
  MatrixLogKernel op(&logk, 2, 2);
  std::vector<double> la = {kNegInf, std::log(1.0)};
  std::vector<double> lb = {std::log(1.0), kNegInf};
  CHECK_THROWS_AS(sinkhorn(op, la, lb, SinkhornOptions{}), DegenerateKernelError);

  CHECK_THROWS_AS(sinkhorn_solve(s.mu.density, s.nu.density, -1.0, s.ref, s.cfg),
                  std::invalid_argument);
}
