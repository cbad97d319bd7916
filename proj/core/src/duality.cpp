#include "bridgelab/duality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bridgelab/numerics.hpp"

namespace bridgelab {

GridFunction hopf_operator(const ReferenceProcess& ref, double T, double t,
                           const GridFunction& phi) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("hopf_operator: t in (0,1]");
  const int n = ref.grid().n;
  GridFunction logu(n);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(phi[i])) throw std::invalid_argument("hopf_operator: non-finite phi");
    logu[i] = -phi[i] / T;
  }
  GridFunction log_p = ref.log_apply(T * t, logu);
  GridFunction out(n);
  for (int i = 0; i < n; ++i) out[i] = -T * log_p[i];
  return out;
}

double dual_value(const MDensity& mu, const MDensity& nu, const ReferenceProcess& ref,
                  double T, const GridFunction& phi) {
  const auto& m = ref.m();
  const int n = ref.grid().n;
  GridFunction q = hopf_operator(ref, T, 1.0, phi);
  double v = T * relative_entropy(mu, m);
  for (int i = 0; i < n; ++i)
    v += (q[i] * mu.values[i] - phi[i] * nu.values[i]) * m[i];
  return v;
}

GridFunction dual_optimizer(const SchrodingerPair& pair) {
  const int n = pair.ref->grid().n;
  GridFunction phi(n);
  for (int i = 0; i < n; ++i) {
    // off supp(nu): phi large so exp(-phi/T) underflows like g itself
    const double lg = std::isfinite(pair.log_g[i]) ? std::max(pair.log_g[i], -745.0)
                                                   : -745.0;
    phi[i] = -pair.T * lg;
  }
  return phi;
}

ExpExpSides exp_exp_check(const ReferenceProcess& ref, double T, double C,
                          const GridFunction& phi) {
  if (!(C > 0.0)) throw std::invalid_argument("exp_exp_check: need C > 0");
  const auto& m = ref.m();
  const auto& logm = ref.log_m();
  const int n = ref.grid().n;
  std::vector<double> terms(n);
  for (int i = 0; i < n; ++i) terms[i] = -phi[i] / (T * C) + logm[i];
  ExpExpSides s;
  s.lhs = std::exp(logsumexp(terms));
  GridFunction q = hopf_operator(ref, T, 1.0, phi);
  s.rhs = std::exp(-integrate(q, m) / (T * C));
  return s;
}

SharpnessScan talagrand_sharpness_scan(const ReferenceProcess& ref, double T,
                                       const std::vector<double>& Cs) {
  const int n = ref.grid().n;
  const std::vector<double> alphas = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  SharpnessScan scan;
  scan.Cs = Cs;
  scan.violations.assign(Cs.size(), 0.0);
  for (std::size_t k = 0; k < Cs.size(); ++k) {
    double worst = -1e300;
    for (double a : alphas) {
      GridFunction phi(n);
      for (int i = 0; i < n; ++i) phi[i] = a * ref.grid().points[i];
      ExpExpSides s = exp_exp_check(ref, T, Cs[k], phi);
      worst = std::max(worst, (s.lhs - s.rhs) / s.rhs);
    }
    scan.violations[k] = worst;
  }
  // threshold: smallest scanned C with no violation beyond noise
  scan.threshold = Cs.back();
  std::vector<std::size_t> idx(Cs.size());
  for (std::size_t k = 0; k < Cs.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return Cs[a] < Cs[b]; });
  for (std::size_t k : idx)
    if (scan.violations[k] <= 1e-9) {
      scan.threshold = Cs[k];
      break;
    }
  return scan;
}

DualReport dual_report(const MDensity& mu, const MDensity& nu, const ReferenceProcess& ref,
                       double T, const SolverConfig& cfg,
                       const std::vector<GridFunction>& test_functions) {
  DualReport rep;
  SchrodingerPair pair = sinkhorn_solve(mu, nu, T, ref, cfg);
  rep.primal = T * entropic_cost(pair);
  rep.dual_at_star = dual_value(mu, nu, ref, T, dual_optimizer(pair));
  for (const auto& phi : test_functions)
    rep.gaps.push_back(rep.primal - dual_value(mu, nu, ref, T, phi));
  return rep;
}

}  // namespace bridgelab
