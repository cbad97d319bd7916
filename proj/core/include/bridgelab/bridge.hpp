#pragma once

#include <utility>
#include <vector>

#include "bridgelab/grid.hpp"
#include "bridgelab/reference.hpp"
#include "bridgelab/sinkhorn.hpp"

namespace bridgelab {

struct SolverConfig {
  double tol = 1e-10;    // L1(m) marginal residual
  int max_iter = 100000;
  int time_grid = 33;    // nodes for energy / Fisher time quadrature
};

// The (f, g) decomposition of the optimal coupling, gauged to |g|_{L1(m)} = 1.
struct SchrodingerPair {
  double T = 0.0;
  const ReferenceProcess* ref = nullptr;
  GridFunction log_f, log_g;   // -inf off the marginal supports
  GridFunction log_mu, log_nu; // log marginal densities w.r.t. m
  double residual = 0.0;
  int iterations = 0;
  SinkhornStatus status = SinkhornStatus::kConverged;
  std::vector<double> residual_history;
};

SchrodingerPair sinkhorn_solve(const MDensity& mu, const MDensity& nu, double T,
                               const ReferenceProcess& ref, const SolverConfig& cfg,
                               const SchrodingerPair* warm = nullptr);

// C_T = \int log f dmu + \int log g dnu.
double entropic_cost(const SchrodingerPair& pair);

// The equivalent product form \int (f log f) P_T g dm + \int (g log g) P_T f dm.
double entropic_cost_product_form(const SchrodingerPair& pair);

// pi(x,y) = f(x) g(y) p_T(x,y), density w.r.t. m x m (row-major n*n).
std::vector<double> coupling(const SchrodingerPair& pair);

// Entropic interpolation rho_t = P_{Tt} f . P_{T(1-t)} g for t in [0, 1].
MDensity interpolation(const SchrodingerPair& pair, double t);

// v_t = (T/2) grad log P_{T(1-t)} g - (T/2) grad log P_{Tt} f.
GridFunction velocity(const SchrodingerPair& pair, double t);

// Conserved energy sampled at interior t; both algebraic forms agree by
// construction, energy() returns the cross-gradient form.
double energy(const SchrodingerPair& pair, double t);
std::pair<double, double> energy_both_forms(const SchrodingerPair& pair, double t);

// Time-trapezoid of \int |grad log rho_t|^2 rho_t dm over [0, 1]; endpoint
// nodes use the marginals directly.
double fisher_integral(const SchrodingerPair& pair, int time_grid_size);

struct CurveSample {
  MDensity rho;
  GridFunction v;
};

// Benamou-Brenier action of a sampled curve on a uniform t-grid over [0, 1]:
// trapezoid of \int (|v|^2/2 + (T^2/8) |grad log rho|^2) rho dm.
double action(const Grid& grid, const std::vector<double>& m_weights,
              const std::vector<CurveSample>& curve, double T);

// Action of the solved pair's own interpolation, via kernel gradients.
double optimal_action(const SchrodingerPair& pair, int time_grid_size);

struct BridgeSolution {
  SchrodingerPair pair;
  double cost = 0.0;
  std::vector<std::pair<double, double>> energy_samples;  // (t, E)
  double fisher = 0.0;
  double action = 0.0;
};

BridgeSolution solve_bridge(const MDensity& mu, const MDensity& nu, double T,
                            const ReferenceProcess& ref, const SolverConfig& cfg,
                            const SchrodingerPair* warm = nullptr);

}  // namespace bridgelab
