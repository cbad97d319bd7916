#pragma once

#include <vector>

#include "bridgelab/bridge.hpp"

namespace bridgelab {

struct SweepReport {
  std::vector<double> Ts;
  std::vector<double> costs;
  std::vector<double> energies;          // mean of the interior energy samples
  std::vector<double> fisher_integrals;
  std::vector<double> deriv_residuals;           // |dC/dT + E| (central diff)
  std::vector<double> rescaled_deriv_residuals;  // |d(TC)/dT - (C - T E)|
  std::vector<bool> ok;                          // per-entry solver status
};

// One independent solve per T (parallelizable); derivative residuals use
// warm-started side solves at T(1 +- 1e-3).
SweepReport sweep(const MDensity& mu, const MDensity& nu, const ReferenceProcess& ref,
                  const std::vector<double>& Ts, const SolverConfig& cfg,
                  bool with_derivatives = true);

// |(C_{T+h} - C_{T-h})/(2h) + E_T|.
double check_first_derivative(const MDensity& mu, const MDensity& nu,
                              const ReferenceProcess& ref, double T, double h,
                              const SolverConfig& cfg);

struct RescaledDerivativeResiduals {
  double vs_cost_energy = 0.0;    // |d(TC)/dT - (C - T E)|
  double vs_entropy_fisher = 0.0; // |d(TC)/dT - (H/2 + H/2 + (T/4) FisherIntegral)|
  double rhs_mismatch = 0.0;      // |(C - T E) - (H/2 + H/2 + (T/4) FisherIntegral)|
};

RescaledDerivativeResiduals check_rescaled_derivative(const MDensity& mu, const MDensity& nu,
                                                      const ReferenceProcess& ref, double T,
                                                      double h, const SolverConfig& cfg,
                                                      int fisher_time_grid = 129,
                                                      bool richardson_fisher = false);

struct FisherMonotoneReport {
  std::vector<double> Ts;
  std::vector<double> fisher_integrals;
  bool monotone = false;  // non-increasing within 1e-6 (1 + value)
};

FisherMonotoneReport check_fisher_monotone(const MDensity& mu, const MDensity& nu,
                                           const ReferenceProcess& ref,
                                           const std::vector<double>& Ts,
                                           const SolverConfig& cfg);

// Central second difference of T C_T (Richardson over h, 2h) against
// -2 E_T - T dE/dT; returns (lhs, rhs).
std::pair<double, double> second_derivative_check(const MDensity& mu, const MDensity& nu,
                                                  const ReferenceProcess& ref, double T,
                                                  double h, const SolverConfig& cfg);

}  // namespace bridgelab
