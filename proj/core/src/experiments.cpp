#include "bridgelab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "bridgelab/duality.hpp"
#include "bridgelab/inequalities.hpp"
#include "bridgelab/numerics.hpp"
#include "bridgelab/shorttime.hpp"
#include "bridgelab/tcalculus.hpp"

namespace bridgelab {

namespace {

using Clock = std::chrono::steady_clock;

struct Ctx {
  Grid grid;
  ReferenceProcess ref;
  Marginal mu, nu;
};

Ctx make_ctx(const ExperimentConfig& cfg) {
  Ctx ctx;
  ctx.grid = config_grid(cfg);
  ctx.ref = config_reference(cfg, ctx.grid);
  ctx.mu = config_marginal(cfg, cfg.mu, ctx.ref);
  ctx.nu = config_marginal(cfg, cfg.nu, ctx.ref);
  return ctx;
}

double energy_spread(const BridgeSolution& sol) {
  double lo = 1e300, hi = -1e300, mean = 0.0;
  for (const auto& [t, e] : sol.energy_samples) {
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    mean += e;
  }
  mean /= sol.energy_samples.size();
  return (hi - lo) / (1.0 + std::abs(mean));
}

GridFunction random_bounded_function(const Grid& grid, Rng& rng) {
  const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(0.3, 2.0);
  const double c = rng.uniform(-1.0, 1.0), d = rng.uniform(-2.0, 2.0);
  GridFunction u(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.points[i];
    u[i] = a * std::sin(b * x + c) + d * std::exp(-0.2 * x * x);
  }
  return u;
}

void run_solve(const ExperimentConfig& cfg, RunReport& rep) {
  Ctx ctx = make_ctx(cfg);
  BridgeSolution sol = solve_bridge(ctx.mu.density, ctx.nu.density, cfg.T, ctx.ref,
                                    cfg.solver);
  CsvTable t;
  t.name = "solve";
  t.columns = {"T", "cost", "energy", "energy_spread", "fisher", "action", "residual",
               "iterations"};
  double emean = 0.0;
  for (const auto& [tt, e] : sol.energy_samples) emean += e;
  emean /= sol.energy_samples.size();
  t.add_row({cfg.T, sol.cost, emean, energy_spread(sol), sol.fisher, sol.action,
             sol.pair.residual, static_cast<double>(sol.pair.iterations)});
  rep.tables.push_back(std::move(t));

  rep.require("solve.residual", sol.pair.residual, cfg.solver.tol);
  rep.require("solve.energy_conservation", energy_spread(sol), 1e-5);
  const double floor = std::max(ctx.mu.entropy, ctx.nu.entropy) - 1e-6;
  rep.require_min("solve.cost_above_entropy", sol.cost, floor);
}

void run_sweep(const ExperimentConfig& cfg, RunReport& rep) {
  Ctx ctx = make_ctx(cfg);
  std::vector<double> Ts = cfg.Ts.empty() ? std::vector<double>{0.5, 1.0, 2.0, 4.0} : cfg.Ts;
  SweepReport sw = sweep(ctx.mu.density, ctx.nu.density, ctx.ref, Ts, cfg.solver, true);
  CsvTable t;
  t.name = "sweep";
  t.columns = {"T", "cost", "energy", "fisher", "deriv_residual"};
  double worst = 0.0;
  for (std::size_t k = 0; k < Ts.size(); ++k) {
    t.add_row({sw.Ts[k], sw.costs[k], sw.energies[k], sw.fisher_integrals[k],
               sw.deriv_residuals[k]});
    worst = std::max(worst, sw.deriv_residuals[k]);
  }
  rep.tables.push_back(std::move(t));
  rep.require("sweep.deriv_residual", worst, 1e-4);
  for (bool ok : sw.ok)
    if (!ok) rep.require("sweep.solver_converged", 1.0, 0.0);
}

void run_shorttime(const ExperimentConfig& cfg, RunReport& rep) {
  Ctx ctx = make_ctx(cfg);
  std::vector<double> Ts = cfg.Ts.empty() ? std::vector<double>{0.05, 0.1, 0.2} : cfg.Ts;
  std::vector<double> tg(33);
  for (int k = 0; k < 33; ++k) tg[k] = k / 32.0;
  GeodesicCurve geo = displacement_geodesic(ctx.mu.density, ctx.nu.density, ctx.ref, tg);

  CsvTable t;
  t.name = "shorttime";
  t.columns = {"T", "rescaled_cost_minus_w2half", "upper_bound"};
  double sandwich = -1e300;
  for (double T : Ts) {
    ShorttimeBound b = check_shorttime_bound(ctx.mu.density, ctx.nu.density, ctx.ref, T,
                                             cfg.solver, &geo);
    t.add_row({T, b.mid, b.upper});
    sandwich = std::max({sandwich, -b.mid, b.mid - b.upper - 1e-3 * b.upper});
  }
  rep.tables.push_back(std::move(t));
  rep.require("shorttime.sandwich", sandwich, 1e-6);

  std::vector<double> taylor_Ts = cfg.taylor_Ts.empty()
                                      ? std::vector<double>{0.04, 0.06, 0.08, 0.10, 0.12,
                                                            0.14, 0.16}
                                      : cfg.taylor_Ts;
  auto [fa, fb, fc] = taylor_fit(ctx.mu.density, ctx.nu.density, ctx.ref, taylor_Ts,
                                 cfg.solver);
  const double a_ref = 0.5 * geo.w2sq;
  const double b_ref = 0.5 * (ctx.mu.entropy + ctx.nu.entropy);
  const double c_ref = geo.fisher_integral0 / 8.0;
  CsvTable tf;
  tf.name = "taylor";
  tf.columns = {"a", "b", "c", "a_ref", "b_ref", "c_ref"};
  tf.add_row({fa, fb, fc, a_ref, b_ref, c_ref});
  rep.tables.push_back(std::move(tf));
  rep.require("taylor.a", std::abs(fa - a_ref), 0.02 * a_ref);
  rep.require("taylor.b", std::abs(fb - b_ref), 0.02 * std::abs(b_ref));
  rep.require("taylor.c", std::abs(fc - c_ref), 0.10 * c_ref);
}

void run_longtime(const ExperimentConfig& cfg, RunReport& rep) {
  Ctx ctx = make_ctx(cfg);
  std::vector<double> Ts =
      cfg.Ts.empty() ? std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8} : cfg.Ts;
  auto rows = check_longtime_bounds(ctx.mu.density, ctx.nu.density, ctx.ref, Ts, cfg.solver);
  CsvTable t;
  t.name = "longtime";
  t.columns = {"T", "gap", "simple_bound", "stronger_bound", "abs_energy",
               "energy_bound", "energy_stronger_bound"};
  double worst = -1e300;
  for (const auto& r : rows) {
    t.add_row({r.T, r.gap, r.simple, r.stronger, r.abs_energy, r.e_simple, r.e_stronger});
    const auto slack = [](double rhs) { return 1e-6 + 1e-3 * rhs; };
    worst = std::max({worst, r.gap - r.simple - slack(r.simple),
                      r.gap - r.stronger - slack(r.stronger),
                      r.abs_energy - r.e_simple - slack(r.e_simple),
                      r.abs_energy - r.e_stronger - slack(r.e_stronger),
                      r.stronger - r.simple});
  }
  rep.tables.push_back(std::move(t));
  rep.require("longtime.bounds", worst, 0.0);
}

void run_duality(const ExperimentConfig& cfg, RunReport& rep) {
  Ctx ctx = make_ctx(cfg);
  Rng rng(cfg.seed);
  std::vector<GridFunction> tests;
  for (int k = 0; k < cfg.n_test_functions; ++k)
    tests.push_back(random_bounded_function(ctx.grid, rng));
  DualReport dr = dual_report(ctx.mu.density, ctx.nu.density, ctx.ref, cfg.T, cfg.solver,
                              tests);
  CsvTable t;
  t.name = "duality";
  t.columns = {"primal", "dual_at_star", "min_gap"};
  double min_gap = 1e300;
  for (double g : dr.gaps) min_gap = std::min(min_gap, g);
  t.add_row({dr.primal, dr.dual_at_star, min_gap});
  rep.tables.push_back(std::move(t));
  rep.require("duality.weak", -min_gap, 1e-6);
  rep.require("duality.strong",
              std::abs(dr.primal - dr.dual_at_star) / (1.0 + std::abs(dr.primal)), 1e-6);

  std::vector<double> Cs;
  const double cstar = 1.0 / -std::expm1(-ctx.ref.kappa() * cfg.T);
  for (int k = -20; k <= 20; ++k) Cs.push_back(cstar * (1.0 + 0.005 * k));
  SharpnessScan scan = talagrand_sharpness_scan(ctx.ref, cfg.T, Cs);
  rep.require("duality.threshold", std::abs(scan.threshold - cstar) / cstar, 0.02);
}

void run_mfsp(const ExperimentConfig& cfg, RunReport& rep) {
  Ctx ctx = make_ctx(cfg);
  validate_interaction(cfg.interaction, ctx.grid);
  std::vector<double> mu_leb = lebesgue_density(ctx.grid, ctx.ref.m(), ctx.mu.density);
  std::vector<double> nu_leb = lebesgue_density(ctx.grid, ctx.ref.m(), ctx.nu.density);
  FreeEnergyShift shift = free_energy_minimum(ctx.grid, cfg.interaction, ctx.mu.mean);
  const double f_mu = free_energy_shifted(ctx.grid, cfg.interaction, mu_leb, shift);
  const double f_nu = free_energy_shifted(ctx.grid, cfg.interaction, nu_leb, shift);

  std::vector<double> Ts = cfg.Ts.empty() ? std::vector<double>{cfg.T} : cfg.Ts;
  CsvTable t;
  t.name = "mfsp";
  t.columns = {"T", "mf_cost", "coupling_entropy", "gap_to_limit", "residual",
               "converged"};
  for (double T : Ts) {
    MfspOptions o = cfg.mfsp;
    o.steps = std::max(o.steps, static_cast<int>(std::ceil(cfg.mf_steps_per_unit * T)));
    MfCostRefined r = mfsp_cost_extrapolated(ctx.grid, cfg.interaction, mu_leb, nu_leb, T,
                                             o, f_mu);
    t.add_row({T, r.mf_cost, r.coupling_entropy, std::abs(r.mf_cost - f_mu - f_nu),
               r.fine.fixed_point_residual, r.fine.converged ? 1.0 : 0.0});
    rep.require("mfsp.converged_T" + format_cell(T), r.fine.converged ? 0.0 : 1.0, 0.0);
  }
  rep.tables.push_back(std::move(t));
}

// ------------------------- check suites -------------------------

void suite_semigroup(const ExperimentConfig& cfg, RunReport& rep) {
  ExperimentConfig c = cfg;
  c.n = 801;
  Grid grid = config_grid(c);
  ReferenceProcess ou = build_reference(grid, c.kappa, ou_potential(c.kappa),
                                        Backend::kOuExact);
  ReferenceProcess sp = build_reference(grid, c.kappa, ou_potential(c.kappa),
                                        Backend::kSpectral);
  Rng rng(cfg.seed);

  double mass_err = 0.0, pos_err = 0.0, adj_err = 0.0;
  for (int k = 0; k < 3; ++k) {
    GridFunction u = random_bounded_function(grid, rng);
    const double mean = integrate(u, ou.m());
    for (double t : {0.1, 1.0, 10.0}) {
      GridFunction pu = ou.apply(t, u);
      mass_err = std::max(mass_err, std::abs(integrate(pu, ou.m()) - mean));
    }
    GridFunction upos(grid.n);
    for (int i = 0; i < grid.n; ++i) upos[i] = std::abs(u[i]);
    GridFunction ppos = ou.apply(0.5, upos);
    for (double v : ppos) pos_err = std::max(pos_err, -v);
    GridFunction v = random_bounded_function(grid, rng);
    GridFunction pu = ou.apply(0.7, u), pv = ou.apply(0.7, v);
    double l = 0.0, r = 0.0;
    for (int i = 0; i < grid.n; ++i) {
      l += pu[i] * v[i] * ou.m()[i];
      r += u[i] * pv[i] * ou.m()[i];
    }
    adj_err = std::max(adj_err, std::abs(l - r));
  }
  rep.require("semigroup.mass_conservation", mass_err, 1e-8);
  rep.require("semigroup.positivity", pos_err, 1e-12);
  rep.require("semigroup.self_adjoint", adj_err, 1e-8);

  GridFunction u = random_bounded_function(grid, rng);
  double sg_err = 0.0;
  for (const ReferenceProcess* r : {&ou, &sp}) {
    GridFunction one_shot = r->apply(1.0, u);
    GridFunction two_shot = r->apply(0.3, r->apply(0.7, u));
    for (int i = 0; i < grid.n; ++i)
      if (std::abs(grid.points[i]) <= 0.5 * grid.b)
        sg_err = std::max(sg_err, std::abs(one_shot[i] - two_shot[i]));
  }
  rep.require("semigroup.composition_bulk", sg_err, 1e-7);

  GridFunction ones(grid.n, 1.0);
  GridFunction rs = sp.apply(1.0, ones);
  double rs_err = 0.0;
  for (double v : rs) rs_err = std::max(rs_err, std::abs(v - 1.0));
  rep.require("semigroup.spectral_row_sums", rs_err, 1e-10);

  double agree = 0.0;
  GridFunction a1 = ou.apply(1.0, u), a2 = sp.apply(1.0, u);
  for (int i = 0; i < grid.n; ++i)
    if (std::abs(grid.points[i]) <= 0.5 * grid.b)
      agree = std::max(agree, std::abs(a1[i] - a2[i]));
  double krel = 0.0;
  for (int i = 0; i < grid.n; i += 5) {
    if (std::abs(grid.points[i]) > 3.5) continue;
    for (int j = 0; j < grid.n; j += 5) {
      if (std::abs(grid.points[j]) > 3.5) continue;
      const double pa = ou.kernel(1.0, i, j), pb = sp.kernel(1.0, i, j);
      krel = std::max(krel, std::abs(pa - pb) / (1.0 + std::abs(pa)));
    }
  }
  rep.require("semigroup.backend_apply_agreement", agree, 1e-4);
  rep.require("semigroup.backend_kernel_agreement", krel, 1e-4);

  GridFunction erg = ou.apply(40.0 / c.kappa, u);
  const double mean = integrate(u, ou.m());
  double erg_err = 0.0;
  for (double v : erg) erg_err = std::max(erg_err, std::abs(v - mean));
  rep.require("semigroup.ergodic_limit", erg_err, 1e-6);

  rep.require("semigroup.ou_kernel_value",
              std::abs(ou_kernel(1.0, std::log(2.0), 0.0, 0.0) - std::sqrt(2.0)), 1e-12);
  double stoch = 0.0;
  for (int i = 0; i < grid.n; i += 10) {
    if (std::abs(grid.points[i]) > 0.5 * grid.b) continue;
    double s = 0.0;
    for (int j = 0; j < grid.n; ++j) s += ou.kernel(1.0, i, j) * ou.m()[j];
    stoch = std::max(stoch, std::abs(s - 1.0));
  }
  rep.require("semigroup.kernel_stochastic_bulk", stoch, 1e-8);

  GridFunction ux(grid.n), usin(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    ux[i] = grid.points[i];
    usin[i] = std::sin(grid.points[i]);
  }
  rep.require("semigroup.bakry_emery_linear", bakry_emery_check(ou, 1.0, ux).max_violation,
              0.0);
  rep.require("semigroup.bakry_emery_sine", bakry_emery_check(ou, 0.5, usin).max_violation,
              0.0);
  rep.require("semigroup.kernel_lower_bound", kernel_lower_bound_check(ou, 1.0).max_violation,
              0.0);
}

void suite_bridge(const ExperimentConfig& cfg, RunReport& rep) {
  ExperimentConfig c = cfg;
  c.n = 401;
  Ctx ctx{config_grid(c), {}, {}, {}};
  ctx.ref = config_reference(c, ctx.grid);
  ctx.mu = config_marginal(c, c.mu, ctx.ref);
  ctx.nu = config_marginal(c, c.nu, ctx.ref);
  SolverConfig scfg = c.solver;

  // stationary pair solves exactly
  MDensity m0 = ctx.ref.stationary_density();
  SchrodingerPair triv = sinkhorn_solve(m0, m0, 1.0, ctx.ref, scfg);
  double fg_dev = 0.0;
  for (int i = 0; i < ctx.grid.n; ++i) {
    if (std::abs(ctx.grid.points[i]) > 0.5 * ctx.grid.b) continue;  // bulk
    fg_dev = std::max({fg_dev, std::abs(std::exp(triv.log_f[i]) - 1.0),
                       std::abs(std::exp(triv.log_g[i]) - 1.0)});
  }
  rep.require("bridge.stationary_pair_identity", fg_dev, 1e-9);
  rep.require("bridge.stationary_cost", std::abs(entropic_cost(triv)), 1e-12);
  rep.require("bridge.stationary_energy", std::abs(energy(triv, 0.4)), 1e-12);

  double cons = 0.0, rep_forms = 0.0, cost_floor = -1e300, sym = 0.0;
  for (double T : {0.5, 2.0}) {
    BridgeSolution sol = solve_bridge(ctx.mu.density, ctx.nu.density, T, ctx.ref, scfg);
    cons = std::max(cons, energy_spread(sol));
    const double c1 = entropic_cost(sol.pair);
    const double c2 = entropic_cost_product_form(sol.pair);
    rep_forms = std::max(rep_forms, std::abs(c1 - c2));
    cost_floor = std::max(cost_floor,
                          std::max(ctx.mu.entropy, ctx.nu.entropy) - 1e-6 - c1);
    SchrodingerPair swapped = sinkhorn_solve(ctx.nu.density, ctx.mu.density, T, ctx.ref,
                                             scfg);
    sym = std::max(sym, std::abs(entropic_cost(swapped) - c1));
  }
  rep.require("bridge.energy_conservation", cons, 1e-5);
  rep.require("bridge.cost_product_form", rep_forms, 1e-8);
  rep.require("bridge.cost_above_entropy", cost_floor, 0.0);
  rep.require("bridge.symmetry", sym, 1e-10);

  SchrodingerPair p = sinkhorn_solve(ctx.mu.density, ctx.nu.density, 1.0, ctx.ref, scfg);
  // both integral representations of the cost
  const double c0 = entropic_cost(p);
  {
    const int nt = 129;
    std::vector<double> phi_sq(nt), psi_sq(nt);
    for (int k = 0; k < nt; ++k) {
      const double t = static_cast<double>(k) / (nt - 1);
      GridFunction lpf, dpf, lpg, dpg;
      p.ref->log_apply_grad(p.T * t, p.log_f, &lpf, &dpf);
      p.ref->log_apply_grad(p.T * (1.0 - t), p.log_g, &lpg, &dpg);
      double sf = 0.0, sg = 0.0;
      for (int i = 0; i < ctx.grid.n; ++i) {
        if (!std::isfinite(lpf[i]) || !std::isfinite(lpg[i])) continue;
        const double rho = std::exp(lpf[i] + lpg[i]);
        sf += dpf[i] * dpf[i] * rho * ctx.ref.m()[i];
        sg += dpg[i] * dpg[i] * rho * ctx.ref.m()[i];
      }
      phi_sq[k] = sf;
      psi_sq[k] = sg;
    }
    const double via_g = ctx.mu.entropy + 0.5 * p.T * trapezoid(psi_sq, 0.0, 1.0);
    const double via_f = ctx.nu.entropy + 0.5 * p.T * trapezoid(phi_sq, 0.0, 1.0);
    rep.require("bridge.cost_representation_g", std::abs(via_g - c0) / std::abs(c0), 1e-3);
    rep.require("bridge.cost_representation_f", std::abs(via_f - c0) / std::abs(c0), 1e-3);
  }

  // gauge freedom: rescale then re-gauge
  {
    double worst = 0.0;
    for (double scale : {0.1, 10.0}) {
      SchrodingerPair q = p;
      const double lc = std::log(scale);
      for (int i = 0; i < ctx.grid.n; ++i) {
        if (std::isfinite(q.log_f[i])) q.log_f[i] += lc;
        if (std::isfinite(q.log_g[i])) q.log_g[i] -= lc;
      }
      std::vector<double> gv(ctx.grid.n);
      for (int i = 0; i < ctx.grid.n; ++i)
        gv[i] = std::isfinite(q.log_g[i]) ? q.log_g[i] + ctx.ref.log_m()[i] : kNegInf;
      const double logc = logsumexp(gv);
      for (int i = 0; i < ctx.grid.n; ++i) {
        if (std::isfinite(q.log_g[i])) q.log_g[i] -= logc;
        if (std::isfinite(q.log_f[i])) q.log_f[i] += logc;
      }
      worst = std::max(worst, std::abs(entropic_cost(q) - c0));
      MDensity r1 = interpolation(p, 0.37), r2 = interpolation(q, 0.37);
      for (int i = 0; i < ctx.grid.n; ++i)
        worst = std::max(worst, std::abs(r1.values[i] - r2.values[i]));
    }
    rep.require("bridge.gauge_freedom", worst, 1e-10);
  }

  // residual history decreases monotonically until the floor
  {
    double worst = 0.0;
    const auto& h = p.residual_history;
    for (std::size_t k = 1; k < h.size(); ++k)
      if (h[k - 1] > 10.0 * scfg.tol)
        worst = std::max(worst, h[k] - h[k - 1] * (1.0 + 1e-9));
    rep.require("bridge.residual_monotone", worst, 0.0);
  }

  // interpolation endpoints, mass, velocity antisymmetry, continuity equation
  {
    MDensity r0 = interpolation(p, 0.0), r1 = interpolation(p, 1.0);
    double l0 = 0.0, l1 = 0.0;
    for (int i = 0; i < ctx.grid.n; ++i) {
      l0 += std::abs(r0.values[i] - ctx.mu.density.values[i]) * ctx.ref.m()[i];
      l1 += std::abs(r1.values[i] - ctx.nu.density.values[i]) * ctx.ref.m()[i];
    }
    rep.require("bridge.interpolation_endpoints", std::max(l0, l1), 100.0 * scfg.tol);
    MDensity rmid = interpolation(p, 0.37);
    rep.require("bridge.interpolation_mass",
                std::abs(integrate(rmid.values, ctx.ref.m()) - 1.0), 1e-8);

    SchrodingerPair swapped = sinkhorn_solve(ctx.nu.density, ctx.mu.density, 1.0, ctx.ref,
                                             scfg);
    GridFunction v1 = velocity(p, 0.3), v2 = velocity(swapped, 0.7);
    MDensity rho3 = interpolation(p, 0.3);
    double anti = 0.0;
    for (int i = 0; i < ctx.grid.n; ++i)
      anti = std::max(anti, std::abs(v1[i] + v2[i]) * rho3.values[i]);
    rep.require("bridge.velocity_antisymmetry", anti, 1e-8);

    const double dt = 1e-2;
    MDensity rp = interpolation(p, 0.3 + dt), rm = interpolation(p, 0.3 - dt);
    double dmean = 0.0, flux = 0.0;
    for (int i = 0; i < ctx.grid.n; ++i) {
      dmean += ctx.grid.points[i] * (rp.values[i] - rm.values[i]) * ctx.ref.m()[i];
      flux += v1[i] * rho3.values[i] * ctx.ref.m()[i];
    }
    rep.require("bridge.continuity_equation", std::abs(dmean / (2.0 * dt) - flux), 1e-4);
  }

  // coupling marginals and the T = 12/kappa product limit (mean-zero pair)
  {
    std::vector<double> pi = coupling(p);
    double rowerr = 0.0;
    for (int i = 0; i < ctx.grid.n; ++i) {
      double s = 0.0;
      for (int j = 0; j < ctx.grid.n; ++j)
        s += pi[static_cast<std::size_t>(i) * ctx.grid.n + j] * ctx.ref.m()[j];
      rowerr += std::abs(s - ctx.mu.density.values[i]) * ctx.ref.m()[i];
    }
    rep.require("bridge.coupling_marginal", rowerr, 100.0 * scfg.tol);

    Marginal mz = gaussian_marginal(ctx.ref, 0.0, 0.25, c.window);
    Marginal nz = gaussian_marginal(ctx.ref, 0.0, 0.49, c.window);
    SchrodingerPair plong = sinkhorn_solve(mz.density, nz.density, 12.0 / c.kappa, ctx.ref,
                                           scfg);
    std::vector<double> pil = coupling(plong);
    double prod = 0.0;
    for (int i = 0; i < ctx.grid.n; ++i)
      for (int j = 0; j < ctx.grid.n; ++j)
        prod += std::abs(pil[static_cast<std::size_t>(i) * ctx.grid.n + j] -
                         mz.density.values[i] * nz.density.values[j]) *
                ctx.ref.m()[i] * ctx.ref.m()[j];
    rep.require("bridge.coupling_product_limit", prod, 1e-3);
  }

  // suboptimal curves cost at least the optimal action
  {
    BridgeSolution sol = solve_bridge(ctx.mu.density, ctx.nu.density, 1.0, ctx.ref, scfg);
    const int nt = 33;
    std::vector<CurveSample> curve(nt);
    for (int k = 0; k < nt; ++k) {
      const double t = static_cast<double>(k) / (nt - 1);
      CurveSample s;
      s.rho.values.resize(ctx.grid.n);
      double mass = 0.0;
      for (int i = 0; i < ctx.grid.n; ++i) {
        s.rho.values[i] = (1.0 - t) * ctx.mu.density.values[i] + t * ctx.nu.density.values[i];
        mass += s.rho.values[i] * ctx.ref.m()[i];
      }
      for (double& v : s.rho.values) v /= mass;
      curve[k] = std::move(s);
    }
    // continuity-equation velocity for the linear mixture
    for (int k = 0; k < nt; ++k) {
      CurveSample& s = curve[k];
      s.v.assign(ctx.grid.n, 0.0);
      double acc = 0.0;
      for (int i = 0; i < ctx.grid.n; ++i) {
        acc += (ctx.nu.density.values[i] - ctx.mu.density.values[i]) * ctx.ref.m()[i];
        const double rho_leb = s.rho.values[i] * ctx.ref.m()[i];
        s.v[i] = rho_leb > 1e-14 ? -acc / rho_leb * ctx.grid.quad[i] : 0.0;
      }
    }
    const double mix_action = action(ctx.grid, ctx.ref.m(), curve, 1.0);
    rep.require_min("bridge.suboptimal_action", mix_action, sol.action - 1e-6);
    const double fine_action = optimal_action(sol.pair, 129);
    const double identity =
        std::abs(1.0 * sol.cost - 0.5 * (ctx.mu.entropy + ctx.nu.entropy) - fine_action);
    rep.require("bridge.action_identity_rel", identity / std::abs(sol.cost), 1e-4);
  }
}

void suite_derivatives(const ExperimentConfig& cfg, RunReport& rep) {
  ExperimentConfig c = cfg;
  c.n = 401;
  c.solver.tol = 1e-12;
  Ctx ctx = make_ctx(c);

  double worst1 = 0.0;
  for (double T : {0.5, 1.0, 2.0})
    worst1 = std::max(worst1, check_first_derivative(ctx.mu.density, ctx.nu.density,
                                                     ctx.ref, T, 1e-3 * T, c.solver));
  rep.require("derivatives.first", worst1, 1e-4);

  const double r1 = check_first_derivative(ctx.mu.density, ctx.nu.density, ctx.ref, 1.0,
                                           1e-2, c.solver);
  const double r2 = check_first_derivative(ctx.mu.density, ctx.nu.density, ctx.ref, 1.0,
                                           5e-3, c.solver);
  rep.require_min("derivatives.order_ratio", r1 / std::max(r2, 1e-14), 2.5);

  RescaledDerivativeResiduals rr = check_rescaled_derivative(
      ctx.mu.density, ctx.nu.density, ctx.ref, 1.0, 1e-3, c.solver, 257, true);
  rep.require("derivatives.rescaled_cost_energy", rr.vs_cost_energy, 1e-3);
  rep.require("derivatives.rescaled_entropy_fisher", rr.vs_entropy_fisher, 1e-3);
  rep.require("derivatives.rhs_identity", rr.rhs_mismatch, 1e-6);

  FisherMonotoneReport fm = check_fisher_monotone(
      ctx.mu.density, ctx.nu.density, ctx.ref, {0.05, 0.25, 0.5, 1.0, 2.0, 4.0}, c.solver);
  rep.require("derivatives.fisher_monotone", fm.monotone ? 0.0 : 1.0, 0.0);

  // local convexity of T C_T near 0
  {
    std::vector<double> Ts;
    for (double T = 0.05; T <= 0.5 + 1e-12; T += 0.05) Ts.push_back(T);
    SweepReport sw = sweep(ctx.mu.density, ctx.nu.density, ctx.ref, Ts, c.solver, false);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < Ts.size(); ++k) {
      const double second = Ts[k + 1] * sw.costs[k + 1] - 2.0 * Ts[k] * sw.costs[k] +
                            Ts[k - 1] * sw.costs[k - 1];
      worst = std::max(worst, -second);
    }
    rep.require("derivatives.rescaled_convexity_near_zero", worst, 1e-6);
  }

  auto [lhs, rhs] = second_derivative_check(ctx.mu.density, ctx.nu.density, ctx.ref, 1.0,
                                            2e-3, c.solver);
  rep.require("derivatives.second", std::abs(lhs - rhs) / (1.0 + std::abs(rhs)), 1e-2);
}

void suite_inequalities(const ExperimentConfig& cfg, RunReport& rep) {
  ExperimentConfig c = cfg;
  c.n = 401;
  Ctx base = make_ctx(c);
  Rng rng(cfg.seed);

  InequalityReport talagrand{"talagrand"}, etransport{"energy_transport"},
      cost_energy{"cost_energy"}, kconv{"k_convexity"}, logsob{"log_sobolev"};
  const int kInstances = 20;
  std::vector<Rng> streams;
  for (int k = 0; k < kInstances; ++k) streams.push_back(rng.stream(k));

  for (int k = 0; k < kInstances; ++k) {
    Marginal mu = random_mixture(base.ref, streams[k]);
    Marginal nu = random_mixture(base.ref, streams[k]);
    SolvedInstance inst = solve_instance(mu.density, nu.density, 1.0, base.ref, c.solver);
    for (double t : {0.25, 0.5, 0.75}) talagrand.record(check_talagrand(inst, t));
    etransport.record(check_energy_transport(inst));
    cost_energy.record(check_cost_energy_bound(inst));
    std::vector<double> tg;
    for (int q = 1; q <= 9; ++q) tg.push_back(q / 10.0);
    for (const auto& s : check_kconvexity(inst, tg)) kconv.record(s);
    logsob.record(check_logsob(mu.density, base.ref));
  }
  for (const auto* r : {&talagrand, &etransport, &cost_energy, &kconv, &logsob})
    rep.require("inequalities." + r->name, r->max_violation, 0.0);

  Marginal mu = config_marginal(c, c.mu, base.ref);
  Marginal nu = config_marginal(c, c.nu, base.ref);
  auto rows = check_longtime_bounds(mu.density, nu.density, base.ref,
                                    {1, 2, 3, 4, 5, 6, 7, 8}, c.solver);
  double worst = -1e300, nonmono = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    const auto slack = [](double rhs) { return 1e-6 + 1e-3 * rhs; };
    worst = std::max({worst, r.gap - r.simple - slack(r.simple),
                      r.gap - r.stronger - slack(r.stronger),
                      r.abs_energy - r.e_simple - slack(r.e_simple),
                      r.abs_energy - r.e_stronger - slack(r.e_stronger),
                      r.stronger - r.simple});
    if (k > 0 && rows[k].T > 2.0 / c.kappa)
      nonmono = std::max(nonmono, rows[k].gap - rows[k - 1].gap - 1e-9);
  }
  rep.require("inequalities.longtime_bounds", worst, 0.0);
  rep.require("inequalities.longtime_gap_monotone", nonmono, 0.0);
}

void suite_shorttime(const ExperimentConfig& cfg, RunReport& rep) {
  ExperimentConfig c = cfg;
  c.n = 801;
  c.solver.tol = 1e-12;
  Ctx ctx = make_ctx(c);

  Marginal g1 = gaussian_marginal(ctx.ref, 1.0, 0.25);
  Marginal g2 = gaussian_marginal(ctx.ref, -1.0, 0.25);
  const double w2 = wasserstein2_1d(g1.density, g2.density, ctx.ref);
  rep.require("shorttime.w2_gaussian", std::abs(w2 - 4.0), 1e-3);
  rep.require("shorttime.w2_identical",
              wasserstein2_1d(g1.density, g1.density, ctx.ref), 1e-12);
  Marginal g1s = gaussian_marginal(ctx.ref, 1.5, 0.25);
  Marginal g2s = gaussian_marginal(ctx.ref, -0.5, 0.25);
  rep.require("shorttime.w2_translation",
              std::abs(wasserstein2_1d(g1s.density, g2s.density, ctx.ref) - w2), 1e-6);

  std::vector<double> tg(33);
  for (int k = 0; k < 33; ++k) tg[k] = k / 32.0;
  GeodesicCurve geo = displacement_geodesic(g1.density, g2.density, ctx.ref, tg);
  {
    // closed-form displacement of equal-variance Gaussians
    Marginal mid = gaussian_marginal(ctx.ref, 0.0, 0.25);
    double l1 = 0.0;
    const auto& rho = geo.densities[16].values;
    for (int i = 0; i < ctx.grid.n; ++i)
      l1 += std::abs(rho[i] - mid.density.values[i]) * ctx.ref.m()[i];
    rep.require("shorttime.geodesic_gaussian_l1", l1, 2e-3);
    rep.require("shorttime.geodesic_mass",
                std::abs(integrate(geo.densities[16].values, ctx.ref.m()) - 1.0), 1e-6);
    GeodesicCurve still = displacement_geodesic(g1.density, g1.density, ctx.ref, tg);
    const double fish_mu = fisher_information(ctx.grid, g1.density, ctx.ref.m());
    rep.require("shorttime.geodesic_constant_fisher",
                std::abs(still.fisher_integral0 - fish_mu), 1e-3 * (1.0 + fish_mu));
  }

  double sandwich = -1e300;
  for (double T : {0.05, 0.1, 0.2}) {
    ShorttimeBound b =
        check_shorttime_bound(g1.density, g2.density, ctx.ref, T, c.solver, &geo);
    sandwich = std::max({sandwich, -b.mid - 1e-6, b.mid - b.upper - 1e-3 * b.upper});
  }
  rep.require("shorttime.sandwich", sandwich, 0.0);

  {
    SchrodingerPair p = sinkhorn_solve(g1.density, g2.density, 0.05, ctx.ref, c.solver);
    const double e = energy(p, 0.5);
    rep.require("shorttime.energy_scaling",
                std::abs(0.05 * 0.05 * e - 0.5 * geo.w2sq), 0.1 * 0.5 * geo.w2sq);
    rep.require("shorttime.fisher_vs_geodesic",
                fisher_integral(p, 33) - geo.fisher_integral0 * 1.05, 0.0);
  }

  auto [fa, fb, fc] = taylor_fit(g1.density, g2.density, ctx.ref,
                                 {0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16}, c.solver);
  rep.require("shorttime.taylor_a", std::abs(fa - 0.5 * geo.w2sq), 0.02 * 0.5 * geo.w2sq);
  rep.require("shorttime.taylor_b", std::abs(fb - 0.5 * (g1.entropy + g2.entropy)),
              0.02 * 0.5 * (g1.entropy + g2.entropy));
  rep.require("shorttime.taylor_c", std::abs(fc - geo.fisher_integral0 / 8.0),
              0.10 * geo.fisher_integral0 / 8.0);
}

void suite_duality(const ExperimentConfig& cfg, RunReport& rep) {
  ExperimentConfig c = cfg;
  c.n = 401;
  c.solver.tol = 1e-12;
  Ctx ctx = make_ctx(c);
  Rng rng(cfg.seed);

  GridFunction cphi(ctx.grid.n, 1.7);
  GridFunction q = hopf_operator(ctx.ref, 1.0, 1.0, cphi);
  double cdev = 0.0;
  for (int i = 0; i < ctx.grid.n; ++i)
    if (std::abs(ctx.grid.points[i]) <= 0.5 * ctx.grid.b)
      cdev = std::max(cdev, std::abs(q[i] - 1.7));
  rep.require("duality.hopf_constant", cdev, 1e-10);

  GridFunction phi = random_bounded_function(ctx.grid, rng);
  GridFunction phic = phi;
  for (double& v : phic) v += 0.9;
  GridFunction qa = hopf_operator(ctx.ref, 1.0, 1.0, phi);
  GridFunction qb = hopf_operator(ctx.ref, 1.0, 1.0, phic);
  double shift_dev = 0.0;
  for (int i = 0; i < ctx.grid.n; ++i)
    shift_dev = std::max(shift_dev, std::abs(qb[i] - qa[i] - 0.9));
  rep.require("duality.hopf_shift", shift_dev, 1e-10);

  GridFunction phi2 = phi;
  for (int i = 0; i < ctx.grid.n; ++i) phi2[i] += 0.3 + 0.2 * std::sin(ctx.grid.points[i]);
  GridFunction q2 = hopf_operator(ctx.ref, 1.0, 1.0, phi2);
  double mono = 0.0;
  for (int i = 0; i < ctx.grid.n; ++i) mono = std::max(mono, qa[i] - q2[i]);
  rep.require("duality.hopf_monotone", mono, 1e-12);

  // closed form for the linear test function
  {
    ExperimentConfig cl = c;
    cl.n = 801;
    Ctx fine = make_ctx(cl);
    GridFunction lin(fine.grid.n);
    for (int i = 0; i < fine.grid.n; ++i) lin[i] = fine.grid.points[i];
    GridFunction ql = hopf_operator(fine.ref, 1.0, 1.0, lin);
    auto closed = [&](double x) {
      return x * std::exp(-0.5) + 0.5 * std::expm1(-1.0);
    };
    const int i0 = fine.grid.n / 2;
    const int i1 = i0 + static_cast<int>(std::lround(1.0 / fine.grid.h));
    rep.require("duality.hopf_linear_x0", std::abs(ql[i0] - closed(0.0)), 1e-8);
    rep.require("duality.hopf_linear_x1", std::abs(ql[i1] - closed(1.0)), 1e-8);
  }

  std::vector<GridFunction> tests;
  for (int k = 0; k < 20; ++k) tests.push_back(random_bounded_function(ctx.grid, rng));
  DualReport dr = dual_report(ctx.mu.density, ctx.nu.density, ctx.ref, 1.0, c.solver,
                              tests);
  double min_gap = 1e300;
  for (double g : dr.gaps) min_gap = std::min(min_gap, g);
  rep.require("duality.weak", -min_gap, 1e-6);
  rep.require("duality.strong",
              std::abs(dr.primal - dr.dual_at_star) / (1.0 + std::abs(dr.primal)), 1e-6);

  for (double T : {1.0, 3.0}) {
    const double cstar = 1.0 / -std::expm1(-ctx.ref.kappa() * T);
    GridFunction lin(ctx.grid.n);
    for (int i = 0; i < ctx.grid.n; ++i) lin[i] = ctx.grid.points[i];
    ExpExpSides at_star = exp_exp_check(ctx.ref, T, cstar, lin);
    rep.require("duality.exp_exp_equality_T" + format_cell(T),
                std::abs(at_star.lhs - at_star.rhs) / at_star.rhs, 1e-6);
    ExpExpSides below = exp_exp_check(ctx.ref, T, 0.9 * cstar, lin);
    rep.require_min("duality.exp_exp_violation_T" + format_cell(T),
                    below.lhs - below.rhs, 1e-9);
    std::vector<double> Cs;
    for (int k = -20; k <= 20; ++k) Cs.push_back(cstar * (1.0 + 0.005 * k));
    SharpnessScan scan = talagrand_sharpness_scan(ctx.ref, T, Cs);
    rep.require("duality.threshold_T" + format_cell(T),
                std::abs(scan.threshold - cstar) / cstar, 0.02);
  }
}

void suite_meanfield(const ExperimentConfig& cfg, RunReport& rep) {
  ExperimentConfig c = cfg;
  c.n = 321;
  Grid grid = config_grid(c);
  ReferenceProcess ou = build_reference(grid, c.kappa, ou_potential(c.kappa),
                                        Backend::kOuExact);
  InteractionPotential wq = make_quadratic(c.kappa);

  // drift closed form and parity
  Marginal mz = gaussian_marginal(ou, 0.0, 0.49, c.window);
  std::vector<double> mz_leb = lebesgue_density(grid, ou.m(), mz.density);
  GridFunction b = interaction_drift(grid, wq, mz_leb);
  double drift_dev = 0.0, parity = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    drift_dev = std::max(drift_dev,
                         std::abs(b[i] + 0.5 * c.kappa * grid.points[i]));
    parity = std::max(parity, std::abs(b[i] + b[grid.n - 1 - i]));
  }
  rep.require("meanfield.drift_quadratic", drift_dev, 1e-8);
  rep.require("meanfield.drift_parity", parity, 1e-10);

  FreeEnergyShift shift = free_energy_minimum(grid, wq, 0.0);
  rep.require("meanfield.free_energy_min",
              std::abs(shift.min_value + 0.5 * std::log(2.0 * M_PI / c.kappa)), 1e-3);
  rep.require("meanfield.free_energy_shift_zero",
              std::abs(free_energy_shifted(grid, wq, shift.minimizer_leb, shift)), 1e-12);
  {
    Marginal gz = gaussian_marginal(ou, 0.0, 1.0 / c.kappa);
    std::vector<double> gz_leb = lebesgue_density(grid, ou.m(), gz.density);
    double l1 = 0.0;
    for (int i = 0; i < grid.n; ++i)
      l1 += std::abs(shift.minimizer_leb[i] - gz_leb[i]) * grid.quad[i];
    rep.require("meanfield.minimizer_is_gaussian", l1, 1e-3);
    const double f = free_energy_shifted(grid, wq, mz_leb, shift);
    rep.require("meanfield.mean_zero_identity", std::abs(f - mz.entropy), 1e-4);
  }

  // quadratic symmetric reduction to the classical cost
  Marginal nz = gaussian_marginal(ou, 0.0, 0.25, c.window);
  std::vector<double> nz_leb = lebesgue_density(grid, ou.m(), nz.density);
  const double f_mu = free_energy_shifted(grid, wq, mz_leb, shift);
  const double f_nu = free_energy_shifted(grid, wq, nz_leb, shift);
  SolverConfig scl;
  scl.tol = 1e-12;
  {
    const double T = 1.0;
    SchrodingerPair cp = sinkhorn_solve(mz.density, nz.density, T, ou, scl);
    MfspOptions o;
    o.steps = 32;
    MfCostRefined r = mfsp_cost_extrapolated(grid, wq, mz_leb, nz_leb, T, o, f_mu);
    rep.require("meanfield.quadratic_reduction",
                std::abs(r.mf_cost - entropic_cost(cp)), 1e-3);
    rep.require("meanfield.converged", r.fine.converged ? 0.0 : 1.0, 0.0);
    rep.require("meanfield.barycenter", r.fine.max_barycenter_dev, 1e-6);

    // the stationary pair relaxes to cost ~ 0
    MfspOptions o8;
    o8.steps = 256;
    MfCostRefined st = mfsp_cost_extrapolated(grid, wq, shift.minimizer_leb,
                                              shift.minimizer_leb, 8.0 / c.kappa, o8, 0.0);
    rep.require("meanfield.stationary_cost", std::abs(st.mf_cost), 1e-3);

    InteractionPotential wqq = make_quadratic_quartic(c.kappa, 0.05);
    FreeEnergyShift shift_q = free_energy_minimum(grid, wqq, 0.0);
    const double fq_mu = free_energy_shifted(grid, wqq, mz_leb, shift_q);
    const double fq_nu = free_energy_shifted(grid, wqq, nz_leb, shift_q);
    MfCostRefined rq = mfsp_cost_extrapolated(grid, wqq, mz_leb, nz_leb, T, o, fq_mu);
    rep.require("meanfield.quartic_converged", rq.fine.converged ? 0.0 : 1.0, 0.0);
    rep.require_min("meanfield.quartic_cost_floor", rq.mf_cost,
                    std::max(fq_mu, fq_nu) - 1e-3);
    const double rhs_q = (fq_mu + fq_nu) / -std::expm1(-0.5 * c.kappa * T);
    rep.require("meanfield.quartic_talagrand", rq.mf_cost - rhs_q, 1e-6);

    const double rhs = f_mu / -std::expm1(-0.5 * c.kappa * 2.0) +
                       f_nu / -std::expm1(-0.5 * c.kappa * 2.0);
    MfspOptions o2;
    o2.steps = 64;
    MfCostRefined r2 = mfsp_cost_extrapolated(grid, wq, mz_leb, nz_leb, 2.0, o2, f_mu);
    rep.require("meanfield.talagrand", r2.mf_cost - rhs, 1e-6);
  }

  bool rejected = false;
  try {
    Marginal off = gaussian_marginal(ou, 0.7, 0.25, c.window);
    std::vector<double> off_leb = lebesgue_density(grid, ou.m(), off.density);
    MfspOptions o;
    mfsp_solve(grid, wq, mz_leb, off_leb, 1.0, o, 0.0);
  } catch (const std::invalid_argument&) {
    rejected = true;
  }
  rep.require("meanfield.barycenter_mismatch_rejected", rejected ? 0.0 : 1.0, 0.0);

  rejected = false;
  try {
    make_quadratic(0.0);
    validate_interaction(make_quadratic(0.0), grid);
  } catch (const std::invalid_argument&) {
    rejected = true;
  }
  rep.require("meanfield.degenerate_interaction_rejected", rejected ? 0.0 : 1.0, 0.0);
}

void append_suite(const std::string& name, const ExperimentConfig& cfg, RunReport& rep) {
  if (name == "semigroup") return suite_semigroup(cfg, rep);
  if (name == "bridge") return suite_bridge(cfg, rep);
  if (name == "derivatives") return suite_derivatives(cfg, rep);
  if (name == "inequalities") return suite_inequalities(cfg, rep);
  if (name == "shorttime") return suite_shorttime(cfg, rep);
  if (name == "duality") return suite_duality(cfg, rep);
  if (name == "meanfield") return suite_meanfield(cfg, rep);
  throw ConfigError("unknown check suite: " + name);
}

}  // namespace

RunReport run_check_suite(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.experiment = "check:" + cfg.suite;
  rep.config_hash = fnv1a_hex(cfg.raw_json);
  rep.config_echo = cfg.raw_json;
  const auto t0 = Clock::now();
  if (cfg.suite == "all") {
    for (const char* s : {"semigroup", "bridge", "derivatives", "inequalities",
                          "shorttime", "duality", "meanfield"})
      append_suite(s, cfg, rep);
  } else {
    append_suite(cfg.suite, cfg, rep);
  }
  CsvTable t;
  t.name = "checks";
  t.columns = {"name", "value", "threshold", "pass"};
  for (const auto& a : rep.assertions)
    t.add_row({a.name, format_cell(a.value), format_cell(a.threshold),
               a.pass ? "1" : "0"});
  rep.tables.push_back(std::move(t));
  rep.wallclock_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "check") return run_check_suite(cfg);
  RunReport rep;
  rep.experiment = cfg.experiment;
  rep.config_hash = fnv1a_hex(cfg.raw_json);
  rep.config_echo = cfg.raw_json;
  const auto t0 = Clock::now();
  if (cfg.experiment == "solve")
    run_solve(cfg, rep);
  else if (cfg.experiment == "sweep")
    run_sweep(cfg, rep);
  else if (cfg.experiment == "shorttime")
    run_shorttime(cfg, rep);
  else if (cfg.experiment == "longtime")
    run_longtime(cfg, rep);
  else if (cfg.experiment == "duality")
    run_duality(cfg, rep);
  else if (cfg.experiment == "mfsp")
    run_mfsp(cfg, rep);
  else
    throw ConfigError("unknown experiment: " + cfg.experiment);
  rep.wallclock_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

}  // namespace bridgelab
