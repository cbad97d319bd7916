#pragma once

#include <string>
#include <vector>

#include "bridgelab/grid.hpp"

namespace bridgelab {

enum class Backend { kOuExact, kSpectral };

struct PotentialSpec {
  enum class Type { kOu, kTabulated };
  Type type = Type::kOu;
  double kappa = 1.0;        // curvature parameter of the CD(kappa, inf) condition
  GridFunction values;       // tabulated U at grid nodes (kTabulated only)
};

PotentialSpec ou_potential(double kappa);
PotentialSpec tabulated_potential(double kappa, GridFunction values);

// Stationary OU transition density w.r.t. its invariant Gaussian measure. t > 0.
double ou_kernel(double kappa, double t, double x, double y);
double ou_log_kernel(double kappa, double t, double x, double y);

// Reference diffusion dX = -U'(X) dt + dB on the truncated grid: invariant
// measure m = exp(-2U) dx / Z, semigroup P_t and two-time kernel p_t(x, y).
// Immutable after construction; all queries are const.
class ReferenceProcess {
 public:
  const Grid& grid() const { return grid_; }
  double kappa() const { return kappa_; }
  Backend backend() const { return backend_; }
  const GridFunction& potential() const { return potential_; }
  const std::vector<double>& m() const { return m_; }
  const std::vector<double>& log_m() const { return log_m_; }

  double log_kernel(double t, int i, int j) const;
  double kernel(double t, int i, int j) const;

  // Row-major n*n matrix of log p_t(x_i, x_j).
  std::vector<double> log_kernel_matrix(double t) const;

  // P_t u by kernel quadrature (OU) or spectral evolution; t = 0 returns u.
  GridFunction apply(double t, const GridFunction& u) const;

  // log P_t exp(logu); entries of logu may be -inf (zero mass).
  GridFunction log_apply(double t, const GridFunction& logu) const;

  // Same, plus d/dx log P_t exp(logu). On the OU backend the gradient comes
  // from differentiating the kernel, so it carries quadrature error only.
  void log_apply_grad(double t, const GridFunction& logu, GridFunction* log_pu,
                      GridFunction* dlog_pu) const;

  MDensity stationary_density() const;  // the constant density 1

 private:
  friend ReferenceProcess build_reference(const Grid&, double, const PotentialSpec&, Backend);

  Grid grid_;
  double kappa_ = 1.0;
  Backend backend_ = Backend::kOuExact;
  GridFunction potential_;
  std::vector<double> m_;      // m-quadrature weights, sum 1
  std::vector<double> log_m_;

  // spectral backend state: eigen-decomposition of the symmetrized generator
  std::vector<double> eigenvalues_;
  std::vector<double> eigenvectors_;  // row-major n*n, columns are modes
  std::vector<double> sqrt_m_;

  GridFunction spectral_apply(double t, const GridFunction& u) const;
};

// Throws on curvature-check failure (tabulated potentials need discrete
// 2U'' >= kappa - 1e-6) or a non-normalizable m.
ReferenceProcess build_reference(const Grid& grid, double kappa, const PotentialSpec& spec,
                                 Backend backend);

struct CheckReport {
  std::string name;
  int points = 0;
  double max_violation = 0.0;  // positive = violated beyond slack
  double slack = 0.0;
};

// |grad P_t u|^2 <= exp(-kappa t) P_t(|grad u|^2) on bulk points, up to slack.
CheckReport bakry_emery_check(const ReferenceProcess& ref, double t, const GridFunction& u);

// p_t(x,y) >= exp(-kappa d(x,y)^2 / (2(e^{kappa t/2}-1))) on bulk points, up to slack.
CheckReport kernel_lower_bound_check(const ReferenceProcess& ref, double t);

}  // namespace bridgelab
