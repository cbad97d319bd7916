#include "bridgelab/inequalities.hpp"

#include <cmath>
#include <stdexcept>

#include "bridgelab/numerics.hpp"

namespace bridgelab {

SolvedInstance solve_instance(const MDensity& mu, const MDensity& nu, double T,
                              const ReferenceProcess& ref, const SolverConfig& cfg) {
  SolvedInstance inst;
  inst.pair = sinkhorn_solve(mu, nu, T, ref, cfg);
  inst.cost = entropic_cost(inst.pair);
  inst.h_mu = relative_entropy(mu, ref.m());
  inst.h_nu = relative_entropy(nu, ref.m());
  inst.energy_mid = energy(inst.pair, 0.5);
  return inst;
}

PairSides check_talagrand(const SolvedInstance& inst, double t) {
  const double kappa = inst.pair.ref->kappa();
  if (!(kappa > 0.0)) throw std::invalid_argument("check_talagrand: needs kappa > 0");
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("check_talagrand: t in (0,1)");
  const double T = inst.pair.T;
  PairSides s;
  s.lhs = inst.cost;
  s.rhs = inst.h_mu / -std::expm1(-kappa * T * t) +
          inst.h_nu / -std::expm1(-kappa * T * (1.0 - t));
  return s;
}

PairSides check_energy_transport(const SolvedInstance& inst) {
  const double kappa = inst.pair.ref->kappa();
  const double T = inst.pair.T;
  const double prod = std::max(0.0, inst.cost - inst.h_mu) *
                      std::max(0.0, inst.cost - inst.h_nu);
  PairSides s;
  s.lhs = std::abs(inst.energy_mid);
  const double coef = kappa != 0.0 ? kappa / std::expm1(0.5 * kappa * T) : 1.0 / T;
  s.rhs = coef * std::sqrt(prod);
  return s;
}

PairSides check_cost_energy_bound(const SolvedInstance& inst) {
  PairSides s;
  s.lhs = inst.pair.T * std::abs(inst.energy_mid);
  s.rhs = inst.cost - 0.5 * (inst.h_mu + inst.h_nu);
  return s;
}

std::vector<PairSides> check_kconvexity(const SolvedInstance& inst,
                                        const std::vector<double>& t_grid) {
  const ReferenceProcess& ref = *inst.pair.ref;
  const double kappa = ref.kappa();
  if (!(kappa > 0.0)) throw std::invalid_argument("check_kconvexity: needs kappa > 0");
  const double T = inst.pair.T;
  const double den = -std::expm1(-kappa * T);
  std::vector<PairSides> out;
  for (double t : t_grid) {
    MDensity rho = interpolation(inst.pair, t);
    double mass = 0.0;
    for (int i = 0; i < ref.grid().n; ++i) mass += rho.values[i] * ref.m()[i];
    for (double& v : rho.values) v /= mass;
    PairSides s;
    s.lhs = relative_entropy(rho, ref.m());
    const double w_mu = -std::expm1(-kappa * T * (1.0 - t)) / den;
    const double w_nu = -std::expm1(-kappa * T * t) / den;
    const double coef = (std::cosh(0.5 * kappa * T) - std::cosh(kappa * T * (t - 0.5))) /
                        std::sinh(0.5 * kappa * T);
    s.rhs = w_mu * inst.h_mu + w_nu * inst.h_nu - coef * inst.cost;
    out.push_back(s);
  }
  return out;
}

PairSides check_logsob(const MDensity& rho, const ReferenceProcess& ref) {
  const double kappa = ref.kappa();
  if (!(kappa > 0.0)) throw std::invalid_argument("check_logsob: needs kappa > 0");
  PairSides s;
  s.lhs = relative_entropy(rho, ref.m());
  s.rhs = fisher_information(ref.grid(), rho, ref.m()) / (2.0 * kappa);
  return s;
}

std::vector<LongtimeBoundRow> check_longtime_bounds(const MDensity& mu, const MDensity& nu,
                                                    const ReferenceProcess& ref,
                                                    const std::vector<double>& Ts,
                                                    const SolverConfig& cfg) {
  const double kappa = ref.kappa();
  if (!(kappa > 0.0)) throw std::invalid_argument("check_longtime_bounds: needs kappa > 0");
  std::vector<LongtimeBoundRow> rows(Ts.size());
  const double h_mu = relative_entropy(mu, ref.m());
  const double h_nu = relative_entropy(nu, ref.m());
  parallel_for(static_cast<int>(Ts.size()), [&](int k) {
    const double T = Ts[k];
    SolvedInstance inst = solve_instance(mu, nu, T, ref, cfg);
    LongtimeBoundRow r;
    r.T = T;
    r.gap = std::abs(inst.cost - h_mu - h_nu);
    const double em = std::expm1(0.5 * kappa * T);       // e^{kT/2} - 1
    const double q = std::exp(-0.5 * kappa * T);
    const double delta = h_mu * h_mu + q * h_mu * h_nu + h_nu * h_nu;
    r.simple = 2.0 / em * (h_mu + h_nu);
    r.stronger = 2.0 * std::sqrt(h_mu * h_nu + delta * q) / em;
    r.abs_energy = std::abs(inst.energy_mid);
    const double oneminus = -std::expm1(-0.5 * kappa * T);  // 1 - e^{-kT/2}
    r.e_simple = kappa * q / (oneminus * oneminus) * (h_mu + h_nu) * (h_mu + h_nu);
    r.e_stronger = kappa * q / (oneminus * oneminus) * (h_mu * h_nu + delta * q);
    rows[k] = r;
  });
  return rows;
}

LongtimeLimitReport check_limit_longtime(const MDensity& mu, const MDensity& nu,
                                         const ReferenceProcess& ref,
                                         const std::vector<double>& Ts,
                                         const SolverConfig& cfg) {
  LongtimeLimitReport rep;
  rep.Ts = Ts;
  rep.gaps.assign(Ts.size(), 0.0);
  const auto& m = ref.m();
  const int n = ref.grid().n;
  const double h_mu = relative_entropy(mu, m);
  const double h_nu = relative_entropy(nu, m);
  for (std::size_t k = 0; k < Ts.size(); ++k) {
    SchrodingerPair p = sinkhorn_solve(mu, nu, Ts[k], ref, cfg);
    rep.gaps[k] = std::abs(entropic_cost(p) - h_mu - h_nu);
    if (k + 1 == Ts.size()) {
      GridFunction log_pf = ref.log_apply(Ts[k], p.log_f);
      for (int i = 0; i < n; ++i) {
        const double f = std::isfinite(p.log_f[i]) ? std::exp(p.log_f[i]) : 0.0;
        const double g = std::isfinite(p.log_g[i]) ? std::exp(p.log_g[i]) : 0.0;
        const double pf = std::isfinite(log_pf[i]) ? std::exp(log_pf[i]) : 0.0;
        rep.f_l1 += std::abs(f - mu.values[i]) * m[i];
        rep.g_l1 += std::abs(g - nu.values[i]) * m[i];
        rep.pf_l1 += std::abs(pf - 1.0) * m[i];
      }
      std::vector<double> pi = coupling(p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          rep.coupling_product_l1 +=
              std::abs(pi[static_cast<std::size_t>(i) * n + j] -
                       mu.values[i] * nu.values[j]) *
              m[i] * m[j];
    }
  }
  return rep;
}

SharpnessResult sharpness_experiment(const ReferenceProcess& ref,
                                     const std::vector<double>& Ts, const Marginal& mu,
                                     const Marginal& nu, const SolverConfig& cfg) {
  const double kappa = ref.kappa();
  SharpnessResult out;
  const double sigma2 = mu.second_moment;  // matched across the pair
  SchrodingerPair warm;
  bool have_warm = false;
  std::vector<double> fit_t, fit_lg;
  for (double T : Ts) {
    SchrodingerPair p = sinkhorn_solve(mu.density, nu.density, T, ref, cfg,
                                       have_warm ? &warm : nullptr);
    warm = p;
    have_warm = true;
    const double gap = std::abs(entropic_cost(p) - mu.entropy - nu.entropy);
    out.Ts.push_back(T);
    out.gaps.push_back(gap);
    out.betas.push_back(kappa * sigma2 / std::expm1(kappa * T) +
                        0.5 * std::log(-std::expm1(-kappa * T)));
    if (gap > 1e-12) {
      fit_t.push_back(T);
      fit_lg.push_back(std::log(gap));
    }
  }
  out.fitted_slope = fit_slope(fit_t, fit_lg);
  return out;
}

}  // namespace bridgelab
