#include "bridgelab/bridge.hpp"

#include <cmath>
#include <stdexcept>

#include "bridgelab/numerics.hpp"

namespace bridgelab {

namespace {

GridFunction log_of(const std::vector<double>& v) {
  GridFunction out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = v[i] > 0.0 ? std::log(v[i]) : kNegInf;
  return out;
}

// P_{Tt} f and P_{T(1-t)} g with log values and spatial log-gradients.
struct InterpParts {
  GridFunction log_pf, dlog_pf;
  GridFunction log_pg, dlog_pg;
};

InterpParts parts_at(const SchrodingerPair& pair, double t) {
  InterpParts p;
  pair.ref->log_apply_grad(pair.T * t, pair.log_f, &p.log_pf, &p.dlog_pf);
  pair.ref->log_apply_grad(pair.T * (1.0 - t), pair.log_g, &p.log_pg, &p.dlog_pg);
  return p;
}

}  // namespace

SchrodingerPair sinkhorn_solve(const MDensity& mu, const MDensity& nu, double T,
                               const ReferenceProcess& ref, const SolverConfig& cfg,
                               const SchrodingerPair* warm) {
  if (!(T > 0.0)) throw std::invalid_argument("sinkhorn_solve: need T > 0");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("sinkhorn_solve: need tol > 0");
  const int n = ref.grid().n;
  if (static_cast<int>(mu.values.size()) != n || static_cast<int>(nu.values.size()) != n)
    throw std::invalid_argument("sinkhorn_solve: marginal size mismatch");

  const std::vector<double>& logm = ref.log_m();
  std::vector<double> log_a(n), log_b(n);
  GridFunction log_mu = log_of(mu.values), log_nu = log_of(nu.values);
  for (int i = 0; i < n; ++i) {
    log_a[i] = std::isfinite(log_mu[i]) ? log_mu[i] + logm[i] : kNegInf;
    log_b[i] = std::isfinite(log_nu[i]) ? log_nu[i] + logm[i] : kNegInf;
  }

  std::vector<double> logk = ref.log_kernel_matrix(T);
  MatrixLogKernel op(&logk, n, n);

  SinkhornOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iter;

  SinkhornResult seed;
  const SinkhornResult* seed_ptr = nullptr;
  if (warm && static_cast<int>(warm->log_f.size()) == n) {
    seed.log_u.resize(n);
    seed.log_v.resize(n);
    for (int i = 0; i < n; ++i) {
      seed.log_u[i] = std::isfinite(warm->log_f[i]) ? warm->log_f[i] + logm[i] : kNegInf;
      seed.log_v[i] = std::isfinite(warm->log_g[i]) ? warm->log_g[i] + logm[i] : kNegInf;
    }
    seed_ptr = &seed;
  }

  SinkhornResult res = sinkhorn(op, log_a, log_b, opts, seed_ptr);

  SchrodingerPair pair;
  pair.T = T;
  pair.ref = &ref;
  pair.log_mu = std::move(log_mu);
  pair.log_nu = std::move(log_nu);
  pair.residual = res.residual;
  pair.iterations = res.iterations;
  pair.status = res.status;
  pair.residual_history = std::move(res.residual_history);
  pair.log_f.resize(n);
  pair.log_g.resize(n);
  for (int i = 0; i < n; ++i) {
    pair.log_f[i] = std::isfinite(res.log_u[i]) ? res.log_u[i] - logm[i] : kNegInf;
    pair.log_g[i] = std::isfinite(res.log_v[i]) ? res.log_v[i] - logm[i] : kNegInf;
  }
  // gauge |g|_{L1(m)} = 1
  const double logc = logsumexp(res.log_v);
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(pair.log_g[i])) pair.log_g[i] -= logc;
    if (std::isfinite(pair.log_f[i])) pair.log_f[i] += logc;
  }
  return pair;
}

double entropic_cost(const SchrodingerPair& pair) {
  const auto& m = pair.ref->m();
  const int n = pair.ref->grid().n;
  double c = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(pair.log_mu[i]))
      c += pair.log_f[i] * std::exp(pair.log_mu[i]) * m[i];
    if (std::isfinite(pair.log_nu[i]))
      c += pair.log_g[i] * std::exp(pair.log_nu[i]) * m[i];
  }
  return c;
}

double entropic_cost_product_form(const SchrodingerPair& pair) {
  const auto& m = pair.ref->m();
  const int n = pair.ref->grid().n;
  GridFunction log_pg = pair.ref->log_apply(pair.T, pair.log_g);
  GridFunction log_pf = pair.ref->log_apply(pair.T, pair.log_f);
  double c = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(pair.log_f[i]) && std::isfinite(log_pg[i]))
      c += std::exp(pair.log_f[i]) * pair.log_f[i] * std::exp(log_pg[i]) * m[i];
    if (std::isfinite(pair.log_g[i]) && std::isfinite(log_pf[i]))
      c += std::exp(pair.log_g[i]) * pair.log_g[i] * std::exp(log_pf[i]) * m[i];
  }
  return c;
}

std::vector<double> coupling(const SchrodingerPair& pair) {
  const int n = pair.ref->grid().n;
  std::vector<double> logk = pair.ref->log_kernel_matrix(pair.T);
  std::vector<double> pi(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(pair.log_f[i])) continue;
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(pair.log_g[j])) continue;
      pi[static_cast<std::size_t>(i) * n + j] =
          std::exp(pair.log_f[i] + pair.log_g[j] + logk[static_cast<std::size_t>(i) * n + j]);
    }
  }
  return pi;
}

MDensity interpolation(const SchrodingerPair& pair, double t) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("interpolation: t outside [0,1]");
  const int n = pair.ref->grid().n;
  GridFunction log_pf = pair.ref->log_apply(pair.T * t, pair.log_f);
  GridFunction log_pg = pair.ref->log_apply(pair.T * (1.0 - t), pair.log_g);
  MDensity rho;
  rho.values.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (std::isfinite(log_pf[i]) && std::isfinite(log_pg[i]))
      rho.values[i] = std::exp(log_pf[i] + log_pg[i]);
  return rho;
}

GridFunction velocity(const SchrodingerPair& pair, double t) {
  InterpParts p = parts_at(pair, t);
  const int n = pair.ref->grid().n;
  GridFunction v(n);
  for (int i = 0; i < n; ++i) v[i] = 0.5 * pair.T * (p.dlog_pg[i] - p.dlog_pf[i]);
  return v;
}

std::pair<double, double> energy_both_forms(const SchrodingerPair& pair, double t) {
  InterpParts p = parts_at(pair, t);
  const auto& m = pair.ref->m();
  const int n = pair.ref->grid().n;
  const double T = pair.T;
  double cross = 0.0, kinetic = 0.0, fisher = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(p.log_pf[i]) || !std::isfinite(p.log_pg[i])) continue;
    const double rho = std::exp(p.log_pf[i] + p.log_pg[i]);
    const double a = p.dlog_pf[i], b = p.dlog_pg[i];
    cross += a * b * rho * m[i];
    const double v = 0.5 * T * (b - a);
    kinetic += v * v * rho * m[i];
    const double dr = a + b;
    fisher += dr * dr * rho * m[i];
  }
  const double form_cross = -0.5 * cross;
  const double form_bb = kinetic / (2.0 * T * T) - fisher / 8.0;
  return {form_cross, form_bb};
}

double energy(const SchrodingerPair& pair, double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("energy: need t in (0,1)");
  return energy_both_forms(pair, t).first;
}

namespace {

double fisher_at(const SchrodingerPair& pair, double t) {
  const Grid& grid = pair.ref->grid();
  const auto& m = pair.ref->m();
  if (t == 0.0 || t == 1.0) {
    const GridFunction& lg = t == 0.0 ? pair.log_mu : pair.log_nu;
    MDensity rho;
    rho.values.resize(grid.n);
    for (int i = 0; i < grid.n; ++i)
      rho.values[i] = std::isfinite(lg[i]) ? std::exp(lg[i]) : 0.0;
    return fisher_information(grid, rho, m);
  }
  InterpParts p = parts_at(pair, t);
  double s = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    if (!std::isfinite(p.log_pf[i]) || !std::isfinite(p.log_pg[i])) continue;
    const double rho = std::exp(p.log_pf[i] + p.log_pg[i]);
    const double dr = p.dlog_pf[i] + p.dlog_pg[i];
    s += dr * dr * rho * m[i];
  }
  return s;
}

}  // namespace

double fisher_integral(const SchrodingerPair& pair, int time_grid_size) {
  if (time_grid_size < 9) throw std::invalid_argument("fisher_integral: need >= 9 nodes");
  std::vector<double> samples(time_grid_size);
  for (int k = 0; k < time_grid_size; ++k)
    samples[k] = fisher_at(pair, static_cast<double>(k) / (time_grid_size - 1));
  return trapezoid(samples, 0.0, 1.0);
}

double action(const Grid& grid, const std::vector<double>& m_weights,
              const std::vector<CurveSample>& curve, double T) {
  const int nt = static_cast<int>(curve.size());
  if (nt < 2) throw std::invalid_argument("action: need >= 2 samples");
  std::vector<double> vals(nt);
  for (int k = 0; k < nt; ++k) {
    const MDensity& rho = curve[k].rho;
    const GridFunction& v = curve[k].v;
    GridFunction logr(grid.n, 0.0);
    for (int i = 0; i < grid.n; ++i)
      logr[i] = rho.values[i] > 0.0 ? std::log(rho.values[i]) : 0.0;
    GridFunction dl = grad(grid, logr);
    double s = 0.0;
    for (int i = 0; i < grid.n; ++i) {
      if (rho.values[i] <= 0.0) continue;
      const bool interior_ok = (i == 0 || rho.values[i - 1] > 0.0) &&
                               (i == grid.n - 1 || rho.values[i + 1] > 0.0);
      const double fish = interior_ok ? dl[i] * dl[i] : 0.0;
      s += (0.5 * v[i] * v[i] + T * T / 8.0 * fish) * rho.values[i] * m_weights[i];
    }
    vals[k] = s;
  }
  return trapezoid(vals, 0.0, 1.0);
}

double optimal_action(const SchrodingerPair& pair, int time_grid_size) {
  // (1/2)|v|^2 + (T^2/8)|grad log rho|^2 = (T^2/4)(|grad log Pf|^2 + |grad log Pg|^2)
  const auto& m = pair.ref->m();
  const int n = pair.ref->grid().n;
  const double T = pair.T;
  std::vector<double> vals(time_grid_size);
  for (int k = 0; k < time_grid_size; ++k) {
    const double t = static_cast<double>(k) / (time_grid_size - 1);
    const bool endpoint = k == 0 || k == time_grid_size - 1;
    InterpParts p = parts_at(pair, t);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(p.log_pf[i]) || !std::isfinite(p.log_pg[i])) continue;
      if (endpoint) {
        // finite-difference gradients at t in {0,1} need a positive stencil
        const bool lo = i == 0 || (std::isfinite(p.log_pf[i - 1]) && std::isfinite(p.log_pg[i - 1]));
        const bool hi = i == n - 1 || (std::isfinite(p.log_pf[i + 1]) && std::isfinite(p.log_pg[i + 1]));
        if (!lo || !hi) continue;
      }
      const double rho = std::exp(p.log_pf[i] + p.log_pg[i]);
      s += T * T / 4.0 * (p.dlog_pf[i] * p.dlog_pf[i] + p.dlog_pg[i] * p.dlog_pg[i]) *
           rho * m[i];
    }
    vals[k] = s;
  }
  return trapezoid(vals, 0.0, 1.0);
}

BridgeSolution solve_bridge(const MDensity& mu, const MDensity& nu, double T,
                            const ReferenceProcess& ref, const SolverConfig& cfg,
                            const SchrodingerPair* warm) {
  BridgeSolution sol;
  sol.pair = sinkhorn_solve(mu, nu, T, ref, cfg, warm);
  sol.cost = entropic_cost(sol.pair);
  const int nt = cfg.time_grid;
  for (int k = 1; k + 1 < nt; ++k) {
    const double t = static_cast<double>(k) / (nt - 1);
    sol.energy_samples.emplace_back(t, energy(sol.pair, t));
  }
  sol.fisher = fisher_integral(sol.pair, nt);
  sol.action = optimal_action(sol.pair, nt);
  return sol;
}

}  // namespace bridgelab
