#include "bridgelab/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "bridgelab/numerics.hpp"

namespace bridgelab {

Grid make_grid(double a, double b, int n) {
  if (!(a < b)) throw std::invalid_argument("make_grid: need a < b");
  if (n < 3) throw std::invalid_argument("make_grid: need n >= 3");
  Grid g;
  g.a = a;
  g.b = b;
  g.n = n;
  g.h = (b - a) / (n - 1);
  g.points.resize(n);
  for (int i = 0; i < n; ++i) g.points[i] = a + g.h * i;
  g.points.back() = b;
  g.quad = trapezoid_weights(n, b - a);
  return g;
}

MDensity make_mdensity(std::vector<double> values, std::span<const double> m_weights) {
  if (values.size() != m_weights.size())
    throw std::invalid_argument("make_mdensity: size mismatch");
  double mass = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) throw std::invalid_argument("make_mdensity: negative entry");
    mass += values[i] * m_weights[i];
  }
  if (std::abs(mass - 1.0) > 1e-10)
    throw std::invalid_argument("make_mdensity: m-mass deviates from 1 beyond 1e-10");
  return MDensity{std::move(values)};
}

double integrate(std::span<const double> f, std::span<const double> weights) {
  if (f.size() != weights.size()) throw std::invalid_argument("integrate: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * weights[i];
  return s;
}

GridFunction grad(const Grid& grid, std::span<const double> f) {
  const int n = grid.n;
  if (static_cast<int>(f.size()) != n) throw std::invalid_argument("grad: size mismatch");
  GridFunction d(n);
  const double inv2h = 1.0 / (2.0 * grid.h);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
  for (int i = 1; i < n - 1; ++i) d[i] = (f[i + 1] - f[i - 1]) * inv2h;
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
  return d;
}

double relative_entropy(const MDensity& rho, std::span<const double> m_weights) {
  if (rho.values.size() != m_weights.size())
    throw std::invalid_argument("relative_entropy: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    const double r = rho.values[i];
    if (r < 0.0) throw std::invalid_argument("relative_entropy: negative entry");
    if (r > 0.0) s += r * std::log(r) * m_weights[i];
  }
  return s;
}

double fisher_information(const Grid& grid, const MDensity& rho,
                          std::span<const double> m_weights) {
  const int n = grid.n;
  GridFunction logr(n, 0.0);
  for (int i = 0; i < n; ++i) logr[i] = rho.values[i] > 0.0 ? std::log(rho.values[i]) : 0.0;
  // Gradient of log rho is only meaningful where rho > 0 on a full stencil;
  // zero-density nodes are dropped, matching the 0 log 0 convention.
  GridFunction d = grad(grid, logr);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (rho.values[i] <= 0.0) continue;
    const bool lo_ok = i == 0 || rho.values[i - 1] > 0.0;
    const bool hi_ok = i == n - 1 || rho.values[i + 1] > 0.0;
    if (!lo_ok || !hi_ok) continue;
    s += d[i] * d[i] * rho.values[i] * m_weights[i];
  }
  return s;
}

}  // namespace bridgelab
