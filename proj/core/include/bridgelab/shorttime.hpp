#pragma once

#include <array>
#include <vector>

#include "bridgelab/bridge.hpp"

namespace bridgelab {

// Wasserstein geodesic between mu and nu, sampled on a t-grid, with the
// time-integrated Fisher information of the curve.
struct GeodesicCurve {
  std::vector<double> t_grid;
  std::vector<MDensity> densities;  // w.r.t. m; endpoints are mu and nu
  double w2sq = 0.0;
  double fisher_integral0 = 0.0;
};

// W_2^2 via quantile functions of the Lebesgue CDFs, 1e4 quantile nodes.
double wasserstein2_1d(const MDensity& mu, const MDensity& nu, const ReferenceProcess& ref);

// Monotone-rearrangement displacement interpolation, re-binned to the grid
// (mass-conservative) and smoothed once before log-gradients. Marginals must
// have connected supports.
GeodesicCurve displacement_geodesic(const MDensity& mu, const MDensity& nu,
                                    const ReferenceProcess& ref,
                                    const std::vector<double>& t_grid);

struct ShorttimeBound {
  double lower = 0.0;     // 0
  double mid = 0.0;       // T C_T - W2^2/2
  double upper = 0.0;     // (T/2)(H(mu)+H(nu)) + (T^2/8) Fisher0
};

ShorttimeBound check_shorttime_bound(const MDensity& mu, const MDensity& nu,
                                     const ReferenceProcess& ref, double T,
                                     const SolverConfig& cfg,
                                     const GeodesicCurve* geodesic = nullptr);

// Least-squares quadratic fit of T C_T over small Ts; returns (a, b, c) with
// T C_T ~ a + b T + c T^2. Throws on clustered abscissae.
std::array<double, 3> taylor_fit(const MDensity& mu, const MDensity& nu,
                                 const ReferenceProcess& ref,
                                 const std::vector<double>& Ts_small,
                                 const SolverConfig& cfg);

}  // namespace bridgelab
