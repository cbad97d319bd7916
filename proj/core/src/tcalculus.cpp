#include "bridgelab/tcalculus.hpp"

#include <cmath>

#include "bridgelab/numerics.hpp"

namespace bridgelab {

namespace {

double mean_energy(const BridgeSolution& sol) {
  double s = 0.0;
  for (const auto& [t, e] : sol.energy_samples) s += e;
  return sol.energy_samples.empty() ? 0.0 : s / sol.energy_samples.size();
}

}  // namespace

SweepReport sweep(const MDensity& mu, const MDensity& nu, const ReferenceProcess& ref,
                  const std::vector<double>& Ts, const SolverConfig& cfg,
                  bool with_derivatives) {
  const int m = static_cast<int>(Ts.size());
  SweepReport rep;
  rep.Ts = Ts;
  rep.costs.assign(m, 0.0);
  rep.energies.assign(m, 0.0);
  rep.fisher_integrals.assign(m, 0.0);
  rep.deriv_residuals.assign(m, 0.0);
  rep.rescaled_deriv_residuals.assign(m, 0.0);
  rep.ok.assign(m, false);

  parallel_for(m, [&](int k) {
    const double T = Ts[k];
    try {
      BridgeSolution sol = solve_bridge(mu, nu, T, ref, cfg);
      rep.costs[k] = sol.cost;
      rep.energies[k] = mean_energy(sol);
      rep.fisher_integrals[k] = sol.fisher;
      rep.ok[k] = sol.pair.status == SinkhornStatus::kConverged;
      if (with_derivatives && rep.ok[k]) {
        const double h = 1e-3 * T;
        SchrodingerPair pp = sinkhorn_solve(mu, nu, T + h, ref, cfg, &sol.pair);
        SchrodingerPair pm = sinkhorn_solve(mu, nu, T - h, ref, cfg, &sol.pair);
        const double cp = entropic_cost(pp), cm = entropic_cost(pm);
        const double dC = (cp - cm) / (2.0 * h);
        const double dTC = ((T + h) * cp - (T - h) * cm) / (2.0 * h);
        const double E = rep.energies[k];
        rep.deriv_residuals[k] = std::abs(dC + E);
        rep.rescaled_deriv_residuals[k] = std::abs(dTC - (sol.cost - T * E));
      }
    } catch (const std::exception&) {
      rep.ok[k] = false;
    }
  });
  return rep;
}

double check_first_derivative(const MDensity& mu, const MDensity& nu,
                              const ReferenceProcess& ref, double T, double h,
                              const SolverConfig& cfg) {
  SchrodingerPair p0 = sinkhorn_solve(mu, nu, T, ref, cfg);
  SchrodingerPair pp = sinkhorn_solve(mu, nu, T + h, ref, cfg, &p0);
  SchrodingerPair pm = sinkhorn_solve(mu, nu, T - h, ref, cfg, &p0);
  const double dC = (entropic_cost(pp) - entropic_cost(pm)) / (2.0 * h);
  return std::abs(dC + energy(p0, 0.5));
}

RescaledDerivativeResiduals check_rescaled_derivative(const MDensity& mu, const MDensity& nu,
                                                      const ReferenceProcess& ref, double T,
                                                      double h, const SolverConfig& cfg,
                                                      int fisher_time_grid,
                                                      bool richardson_fisher) {
  SchrodingerPair p0 = sinkhorn_solve(mu, nu, T, ref, cfg);
  SchrodingerPair pp = sinkhorn_solve(mu, nu, T + h, ref, cfg, &p0);
  SchrodingerPair pm = sinkhorn_solve(mu, nu, T - h, ref, cfg, &p0);
  const double cp = entropic_cost(pp), cm = entropic_cost(pm), c0 = entropic_cost(p0);
  const double dTC = ((T + h) * cp - (T - h) * cm) / (2.0 * h);
  const double E = energy(p0, 0.5);

  double fi = fisher_integral(p0, fisher_time_grid);
  if (richardson_fisher) {
    const double coarse = fisher_integral(p0, (fisher_time_grid - 1) / 2 + 1);
    fi += (fi - coarse) / 3.0;
  }

  const auto& m = ref.m();
  double h_mu = 0.0, h_nu = 0.0;
  for (int i = 0; i < ref.grid().n; ++i) {
    if (std::isfinite(p0.log_mu[i])) h_mu += std::exp(p0.log_mu[i]) * p0.log_mu[i] * m[i];
    if (std::isfinite(p0.log_nu[i])) h_nu += std::exp(p0.log_nu[i]) * p0.log_nu[i] * m[i];
  }

  RescaledDerivativeResiduals r;
  const double rhs1 = c0 - T * E;
  const double rhs2 = 0.5 * (h_mu + h_nu) + 0.25 * T * fi;
  r.vs_cost_energy = std::abs(dTC - rhs1);
  r.vs_entropy_fisher = std::abs(dTC - rhs2);
  r.rhs_mismatch = std::abs(rhs1 - rhs2);
  return r;
}

FisherMonotoneReport check_fisher_monotone(const MDensity& mu, const MDensity& nu,
                                           const ReferenceProcess& ref,
                                           const std::vector<double>& Ts,
                                           const SolverConfig& cfg) {
  FisherMonotoneReport rep;
  rep.Ts = Ts;
  rep.fisher_integrals.assign(Ts.size(), 0.0);
  parallel_for(static_cast<int>(Ts.size()), [&](int k) {
    SchrodingerPair p = sinkhorn_solve(mu, nu, Ts[k], ref, cfg);
    rep.fisher_integrals[k] = fisher_integral(p, cfg.time_grid);
  });
  rep.monotone = true;
  for (std::size_t k = 1; k < Ts.size(); ++k) {
    const double prev = rep.fisher_integrals[k - 1], cur = rep.fisher_integrals[k];
    if (cur > prev + 1e-6 * (1.0 + std::abs(cur))) rep.monotone = false;
  }
  return rep;
}

std::pair<double, double> second_derivative_check(const MDensity& mu, const MDensity& nu,
                                                  const ReferenceProcess& ref, double T,
                                                  double h, const SolverConfig& cfg) {
  auto tc = [&](double S, const SchrodingerPair* warm, SchrodingerPair* out) {
    SchrodingerPair p = sinkhorn_solve(mu, nu, S, ref, cfg, warm);
    const double v = S * entropic_cost(p);
    if (out) *out = p;
    return v;
  };
  SchrodingerPair p0, pp, pm;
  const double y0 = tc(T, nullptr, &p0);
  const double y1p = tc(T + h, &p0, &pp), y1m = tc(T - h, &p0, &pm);
  const double y2p = tc(T + 2 * h, &pp, nullptr), y2m = tc(T - 2 * h, &pm, nullptr);

  const double d2_h = (y1p - 2.0 * y0 + y1m) / (h * h);
  const double d2_2h = (y2p - 2.0 * y0 + y2m) / (4.0 * h * h);
  const double lhs = (4.0 * d2_h - d2_2h) / 3.0;  // Richardson

  const double dE = (energy(pp, 0.5) - energy(pm, 0.5)) / (2.0 * h);
  const double rhs = -2.0 * energy(p0, 0.5) - T * dE;
  return {lhs, rhs};
}

}  // namespace bridgelab
