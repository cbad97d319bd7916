#pragma once

#include <vector>

#include "bridgelab/bridge.hpp"

namespace bridgelab {

// Q_t^T phi = -T log P_{Tt} exp(-phi/T), evaluated in log domain.
GridFunction hopf_operator(const ReferenceProcess& ref, double T, double t,
                           const GridFunction& phi);

// T H(mu|m) + \int Q_1^T phi dmu - \int phi dnu.
double dual_value(const MDensity& mu, const MDensity& nu, const ReferenceProcess& ref,
                  double T, const GridFunction& phi);

// The Schrödinger potential phi* = -T log g^T; dual_value at phi* equals the
// rescaled primal up to solver residual.
GridFunction dual_optimizer(const SchrodingerPair& pair);

struct ExpExpSides {
  double lhs = 0.0;  // \int exp(-phi/(TC)) dm
  double rhs = 0.0;  // exp(-(1/(TC)) \int Q_1^T phi dm)
};

// Exponential form of the Talagrand inequality; lhs <= rhs holds exactly when
// C >= 1/(1 - e^{-kappa T}).
ExpExpSides exp_exp_check(const ReferenceProcess& ref, double T, double C,
                          const GridFunction& phi);

struct SharpnessScan {
  std::vector<double> Cs;
  std::vector<double> violations;  // max over test slopes of (lhs - rhs)/rhs
  double threshold = 0.0;          // first C (scanning upward) with no violation
};

// Scans linear test functions phi = alpha x over alpha in {±0.5, ±1, ±2}.
SharpnessScan talagrand_sharpness_scan(const ReferenceProcess& ref, double T,
                                       const std::vector<double>& Cs);

struct DualReport {
  double primal = 0.0;       // T C_T
  double dual_at_star = 0.0;
  std::vector<double> gaps;  // primal - dual over test functions, each >= -slack
};

DualReport dual_report(const MDensity& mu, const MDensity& nu, const ReferenceProcess& ref,
                       double T, const SolverConfig& cfg,
                       const std::vector<GridFunction>& test_functions);

}  // namespace bridgelab
