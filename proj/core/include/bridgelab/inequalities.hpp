#pragma once

#include <string>
#include <vector>

#include "bridgelab/bridge.hpp"
#include "bridgelab/marginals.hpp"

namespace bridgelab {

struct PairSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

// slack policy shared by the inequality suites
inline double inequality_slack(double rhs) {
  return std::max(1e-6, 1e-3 * std::abs(rhs));
}

struct InequalityReport {
  std::string name;
  int instances = 0;
  double max_violation = -1e300;  // max(lhs - rhs - slack); positive = violated
  std::vector<PairSides> details;

  void record(const PairSides& s) {
    ++instances;
    details.push_back(s);
    max_violation = std::max(max_violation, s.lhs - s.rhs - inequality_slack(s.rhs));
  }
};

// A solved instance shared by the verifiers below.
struct SolvedInstance {
  SchrodingerPair pair;
  double cost = 0.0;
  double h_mu = 0.0, h_nu = 0.0;
  double energy_mid = 0.0;  // E at t = 1/2
};

SolvedInstance solve_instance(const MDensity& mu, const MDensity& nu, double T,
                              const ReferenceProcess& ref, const SolverConfig& cfg);

// C_T <= H(mu)/(1 - e^{-kTt}) + H(nu)/(1 - e^{-kT(1-t)});  requires kappa > 0.
PairSides check_talagrand(const SolvedInstance& inst, double t);

// |E_T| <= kappa/(e^{kT/2} - 1) sqrt((C-H(mu))(C-H(nu))), 1/T variant at kappa = 0.
PairSides check_energy_transport(const SolvedInstance& inst);

// T |E_T| <= C_T - (H(mu) + H(nu))/2.
PairSides check_cost_energy_bound(const SolvedInstance& inst);

// Entropy along the interpolation against the distorted convexity bound.
std::vector<PairSides> check_kconvexity(const SolvedInstance& inst,
                                        const std::vector<double>& t_grid);

// H(rho m | m) <= (1/(2 kappa)) \int |grad log rho|^2 rho dm.
PairSides check_logsob(const MDensity& rho, const ReferenceProcess& ref);

struct LongtimeBoundRow {
  double T = 0.0;
  double gap = 0.0;          // |C_T - H(mu) - H(nu)|
  double simple = 0.0;       // 2 (H+H) / (e^{kT/2} - 1)
  double stronger = 0.0;
  double abs_energy = 0.0;   // |E_T|
  double e_simple = 0.0;
  double e_stronger = 0.0;
};

std::vector<LongtimeBoundRow> check_longtime_bounds(const MDensity& mu, const MDensity& nu,
                                                    const ReferenceProcess& ref,
                                                    const std::vector<double>& Ts,
                                                    const SolverConfig& cfg);

struct LongtimeLimitReport {
  std::vector<double> Ts;
  std::vector<double> gaps;       // |C_T - H - H|
  double f_l1 = 0.0;              // |f^T - rho|_{L1(m)} at the largest T
  double g_l1 = 0.0;
  double pf_l1 = 0.0;             // |P_T f^T - 1|_{L1(m)}
  double coupling_product_l1 = 0.0;  // |pi - mu x nu|_{L1(m x m)}
};

LongtimeLimitReport check_limit_longtime(const MDensity& mu, const MDensity& nu,
                                         const ReferenceProcess& ref,
                                         const std::vector<double>& Ts,
                                         const SolverConfig& cfg);

struct SharpnessResult {
  std::vector<double> Ts;
  std::vector<double> gaps;   // |C_T - H - H|
  std::vector<double> betas;  // kappa s^2/(e^{kT}-1) + log(1-e^{-kT})/2
  double fitted_slope = 0.0;  // least-squares slope of log gap vs T
};

// Long-time gap decay for moment-pinned Lipschitz marginals; gaps below the
// 1e-12 floor are excluded from the fit.
SharpnessResult sharpness_experiment(const ReferenceProcess& ref,
                                     const std::vector<double>& Ts, const Marginal& mu,
                                     const Marginal& nu, const SolverConfig& cfg);

}  // namespace bridgelab
