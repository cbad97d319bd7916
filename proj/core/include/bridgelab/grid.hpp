#pragma once

#include <span>
#include <vector>

namespace bridgelab {

using GridFunction = std::vector<double>;

// Uniform 1-D grid on [a, b] with trapezoid quadrature weights w.r.t. Lebesgue.
struct Grid {
  double a = 0.0;
  double b = 0.0;
  int n = 0;
  double h = 0.0;
  std::vector<double> points;
  std::vector<double> quad;
};

// Requires a < b and n >= 3.
Grid make_grid(double a, double b, int n);

// Probability density w.r.t. the invariant measure m (vector over grid points).
struct MDensity {
  std::vector<double> values;
};

// Validates non-negativity and unit m-mass (tolerance 1e-10); throws otherwise.
MDensity make_mdensity(std::vector<double> values, std::span<const double> m_weights);

// Sum f_i * w_i. Works for Lebesgue (grid.quad) and m-weight vectors alike.
double integrate(std::span<const double> f, std::span<const double> weights);

// Central differences in the interior, second-order one-sided at the endpoints.
GridFunction grad(const Grid& grid, std::span<const double> f);

// H(rho m | m) = \int rho log rho dm with 0 log 0 = 0; rejects negative entries.
double relative_entropy(const MDensity& rho, std::span<const double> m_weights);

// \int |grad log rho|^2 rho dm; nodes with rho = 0 contribute nothing.
double fisher_information(const Grid& grid, const MDensity& rho,
                          std::span<const double> m_weights);

}  // namespace bridgelab
