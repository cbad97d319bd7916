#include "bridgelab/marginals.hpp"

#include <cmath>
#include <stdexcept>

namespace bridgelab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double Window::value(double x) const {
  const double ax = std::abs(x);
  if (ax <= flat) return 1.0;
  if (ax >= cut) return 0.0;
  const double th = 0.5 * kPi * (ax - flat) / (cut - flat);
  const double c = std::cos(th);
  return c * c;
}

double Window::dlog(double x) const {
  const double ax = std::abs(x);
  if (ax <= flat || ax >= cut) return 0.0;
  const double th = 0.5 * kPi * (ax - flat) / (cut - flat);
  return -kPi / (cut - flat) * std::tan(th) * (x >= 0.0 ? 1.0 : -1.0);
}

namespace {

Marginal finalize(const ReferenceProcess& ref, std::vector<double> lebesgue,
                  std::vector<double> dlog_lebesgue) {
  const Grid& grid = ref.grid();
  const int n = grid.n;
  const auto& m = ref.m();
  Marginal out;
  out.density.values.assign(n, 0.0);
  out.dlog.assign(n, 0.0);
  // density w.r.t. m and mass normalization
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mleb = m[i] / grid.quad[i];
    out.density.values[i] = lebesgue[i] > 0.0 ? lebesgue[i] / mleb : 0.0;
    mass += out.density.values[i] * m[i];
  }
  if (!(mass > 0.0)) throw std::invalid_argument("marginal: zero mass");
  for (int i = 0; i < n; ++i) out.density.values[i] /= mass;
  // d/dx log(rho) = d/dx log(lebesgue density) + 2 U'(x)
  GridFunction du = grad(grid, ref.potential());
  for (int i = 0; i < n; ++i)
    out.dlog[i] = out.density.values[i] > 0.0 ? dlog_lebesgue[i] + 2.0 * du[i] : 0.0;
  out.entropy = relative_entropy(out.density, m);
  for (int i = 0; i < n; ++i) {
    const double w = out.density.values[i] * m[i];
    out.mean += grid.points[i] * w;
    out.second_moment += grid.points[i] * grid.points[i] * w;
  }
  return out;
}

}  // namespace

Marginal mixture_marginal(const ReferenceProcess& ref,
                          const std::vector<MixtureComponent>& comps,
                          std::optional<Window> window) {
  const Grid& grid = ref.grid();
  const int n = grid.n;
  std::vector<double> leb(n, 0.0), dleb(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double x = grid.points[i];
    double g = 0.0, dg = 0.0;
    for (const auto& c : comps) {
      const double z = (x - c.mean) / std::sqrt(c.var);
      const double val = c.weight * std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi * c.var);
      g += val;
      dg += val * (-(x - c.mean) / c.var);
    }
    double w = 1.0, dlw = 0.0;
    if (window) {
      w = window->value(x);
      dlw = window->dlog(x);
    }
    leb[i] = g * w;
    dleb[i] = g > 0.0 && w > 0.0 ? dg / g + dlw : 0.0;
  }
  return finalize(ref, std::move(leb), std::move(dleb));
}

Marginal gaussian_marginal(const ReferenceProcess& ref, double mean, double var,
                           std::optional<Window> window) {
  return mixture_marginal(ref, {{1.0, mean, var}}, window);
}

Marginal random_mixture(const ReferenceProcess& ref, Rng& rng) {
  const int k = rng.uniform_int(1, 3);
  std::vector<MixtureComponent> comps(k);
  for (auto& c : comps) {
    c.weight = rng.uniform(0.2, 1.0);
    c.mean = rng.uniform(-1.5, 1.5);
    c.var = rng.uniform(0.15, 1.0);
  }
  return mixture_marginal(ref, comps, Window{3.5, 4.5});
}

Marginal moment_matched_marginal(const ReferenceProcess& ref, double mean, double m2,
                                 bool bimodal) {
  if (m2 <= mean * mean)
    throw std::invalid_argument("moment_matched_marginal: need m2 > mean^2");
  const Window window{3.5, 4.5};
  // parameters: center a, width s (unimodal) / mode offset d (bimodal with fixed s)
  double a = mean;
  double s = std::sqrt(m2 - mean * mean);
  double d = bimodal ? 0.8 * s : 0.0;

  auto build = [&](double pa, double pb) {
    if (bimodal) {
      const double sep = pb;  // mode offset; component spread tied to it
      const double sig2 = std::max(0.03, s * s - sep * sep);
      return mixture_marginal(
          ref, {{0.5, pa - sep, sig2}, {0.5, pa + sep, sig2}}, window);
    }
    return mixture_marginal(ref, {{1.0, pa, pb * pb}}, window);
  };

  double pa = a, pb = bimodal ? std::max(0.2, d) : s;
  for (int it = 0; it < 60; ++it) {
    Marginal cur = build(pa, pb);
    const double f1 = cur.mean - mean;
    const double f2 = cur.second_moment - m2;
    if (std::abs(f1) < 1e-12 && std::abs(f2) < 1e-12) return cur;
    const double eps = 1e-6;
    Marginal da = build(pa + eps, pb);
    Marginal db = build(pa, pb + eps);
    const double j11 = (da.mean - cur.mean) / eps, j12 = (db.mean - cur.mean) / eps;
    const double j21 = (da.second_moment - cur.second_moment) / eps,
                 j22 = (db.second_moment - cur.second_moment) / eps;
    const double det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-14) break;
    pa -= (j22 * f1 - j12 * f2) / det;
    pb -= (-j21 * f1 + j11 * f2) / det;
    pb = std::max(0.05, pb);
  }
  Marginal out = build(pa, pb);
  if (std::abs(out.mean - mean) > 1e-8 || std::abs(out.second_moment - m2) > 1e-8)
    throw std::runtime_error("moment_matched_marginal: shooting failed to converge");
  return out;
}

}  // namespace bridgelab
