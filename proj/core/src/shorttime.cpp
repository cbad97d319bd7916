#include "bridgelab/shorttime.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bridgelab/numerics.hpp"

namespace bridgelab {

namespace {

constexpr int kQuantileNodes = 10000;

// Piecewise-linear CDF of the Lebesgue density of rho m, and its inverse.
struct QuantileTable {
  std::vector<double> cdf;  // at grid nodes, normalized to end at 1
  const Grid* grid = nullptr;

  double inverse(double q) const {
    const auto& F = cdf;
    const int n = static_cast<int>(F.size());
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (F[mid] <= q ? lo : hi) = mid;
    }
    const double span = F[hi] - F[lo];
    const double w = span > 0.0 ? (q - F[lo]) / span : 0.5;
    return grid->points[lo] + w * (grid->points[hi] - grid->points[lo]);
  }
};

QuantileTable build_cdf(const MDensity& rho, const ReferenceProcess& ref) {
  const Grid& grid = ref.grid();
  const int n = grid.n;
  std::vector<double> leb(n);
  for (int i = 0; i < n; ++i) leb[i] = rho.values[i] * ref.m()[i] / grid.quad[i];
  QuantileTable t;
  t.grid = &grid;
  t.cdf.assign(n, 0.0);
  for (int i = 1; i < n; ++i)
    t.cdf[i] = t.cdf[i - 1] + 0.5 * grid.h * (leb[i - 1] + leb[i]);
  const double total = t.cdf[n - 1];
  if (!(total > 0.0)) throw std::invalid_argument("quantile table: zero mass");
  for (double& v : t.cdf) v /= total;
  return t;
}

void require_connected_support(const MDensity& rho) {
  const int n = static_cast<int>(rho.values.size());
  int first = -1, last = -1;
  for (int i = 0; i < n; ++i)
    if (rho.values[i] > 0.0) {
      if (first < 0) first = i;
      last = i;
    }
  for (int i = first; i <= last; ++i)
    if (rho.values[i] <= 0.0)
      throw std::invalid_argument("displacement_geodesic: disconnected support");
}

}  // namespace

double wasserstein2_1d(const MDensity& mu, const MDensity& nu, const ReferenceProcess& ref) {
  QuantileTable fm = build_cdf(mu, ref), fn = build_cdf(nu, ref);
  double s = 0.0;
  for (int k = 0; k < kQuantileNodes; ++k) {
    const double q = (k + 0.5) / kQuantileNodes;
    const double d = fm.inverse(q) - fn.inverse(q);
    s += d * d;
  }
  return s / kQuantileNodes;
}

namespace {

// Linear interpolation of grid samples at x.
double interp(const Grid& grid, const std::vector<double>& v, double x) {
  const double pos = std::clamp((x - grid.a) / grid.h, 0.0, grid.n - 1.000001);
  const int i0 = static_cast<int>(pos);
  const double f = pos - i0;
  return (1.0 - f) * v[i0] + f * v[i0 + 1];
}

}  // namespace

GeodesicCurve displacement_geodesic(const MDensity& mu, const MDensity& nu,
                                    const ReferenceProcess& ref,
                                    const std::vector<double>& t_grid) {
  require_connected_support(mu);
  require_connected_support(nu);
  const Grid& grid = ref.grid();
  const int n = grid.n;
  const auto& m = ref.m();

  QuantileTable fm = build_cdf(mu, ref), fn = build_cdf(nu, ref);
  std::vector<double> qx(kQuantileNodes), qy(kQuantileNodes);
  for (int k = 0; k < kQuantileNodes; ++k) {
    const double q = (k + 0.5) / kQuantileNodes;
    qx[k] = fm.inverse(q);
    qy[k] = fn.inverse(q);
  }

  GeodesicCurve curve;
  curve.t_grid = t_grid;
  curve.w2sq = 0.0;
  for (int k = 0; k < kQuantileNodes; ++k) {
    const double d = qx[k] - qy[k];
    curve.w2sq += d * d;
  }
  curve.w2sq /= kQuantileNodes;

  // Fisher information along the curve via the monotone-map representation:
  // with X_t(q) the interpolated quantile function, the slice density at
  // X_t(q) is 1/X_t'(q), so grad log rho_t^leb = -X_t''/(X_t')^2 and the
  // m-relative gradient adds 2U'. Quantile weighting makes the q-integral the
  // Fisher integral directly; re-binned slice densities would instead leak
  // spurious Fisher mass at their sampling cliff.
  std::vector<double> leb_mu(n), leb_nu(n), dleb_mu(n), dleb_nu(n), du(n);
  for (int i = 0; i < n; ++i) {
    leb_mu[i] = mu.values[i] * m[i] / grid.quad[i];
    leb_nu[i] = nu.values[i] * m[i] / grid.quad[i];
  }
  {
    GridFunction lmu(n), lnu(n);
    for (int i = 0; i < n; ++i) {
      lmu[i] = leb_mu[i] > 0.0 ? std::log(leb_mu[i]) : -745.0;
      lnu[i] = leb_nu[i] > 0.0 ? std::log(leb_nu[i]) : -745.0;
    }
    GridFunction dlmu = grad(grid, lmu), dlnu = grad(grid, lnu);
    for (int i = 0; i < n; ++i) {
      dleb_mu[i] = leb_mu[i] > 0.0 ? dlmu[i] * leb_mu[i] : 0.0;
      dleb_nu[i] = leb_nu[i] > 0.0 ? dlnu[i] * leb_nu[i] : 0.0;
    }
    du = grad(grid, ref.potential());
  }
  auto fisher_quantile = [&](double t) {
    double s = 0.0;
    for (int k = 0; k < kQuantileNodes; ++k) {
      const double dm = interp(grid, leb_mu, qx[k]);
      const double dn = interp(grid, leb_nu, qy[k]);
      if (dm < 1e-12 || dn < 1e-12) continue;
      const double xp = (1.0 - t) / dm + t / dn;  // X_t'(q)
      const double xpp = -(1.0 - t) * interp(grid, dleb_mu, qx[k]) / (dm * dm * dm) -
                         t * interp(grid, dleb_nu, qy[k]) / (dn * dn * dn);
      const double z = (1.0 - t) * qx[k] + t * qy[k];
      const double g = -xpp / (xp * xp) + 2.0 * interp(grid, du, z);
      s += g * g;
    }
    return s / kQuantileNodes;
  };

  std::vector<double> fisher_samples(t_grid.size(), 0.0);
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const double t = t_grid[ti];
    MDensity rho;
    if (t == 0.0) {
      rho = mu;
    } else if (t == 1.0) {
      rho = nu;
    } else {
      // push quantile samples, bin linearly, one conservative smoothing pass
      std::vector<double> mass(n, 0.0);
      const double w = 1.0 / kQuantileNodes;
      for (int k = 0; k < kQuantileNodes; ++k) {
        double z = (1.0 - t) * qx[k] + t * qy[k];
        z = std::clamp(z, grid.a, grid.b);
        const double pos = (z - grid.a) / grid.h;
        const int i0 = std::min(static_cast<int>(pos), n - 2);
        const double frac = pos - i0;
        mass[i0] += w * (1.0 - frac);
        mass[i0 + 1] += w * frac;
      }
      std::vector<double> sm(n, 0.0);
      for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? mass[i - 1] : mass[i];
        const double right = i < n - 1 ? mass[i + 1] : mass[i];
        sm[i] = 0.25 * left + 0.5 * mass[i] + 0.25 * right;
      }
      rho.values.assign(n, 0.0);
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        rho.values[i] = sm[i] / m[i];
        total += rho.values[i] * m[i];
      }
      for (double& v : rho.values) v /= total;
    }
    fisher_samples[ti] = fisher_quantile(t);
    curve.densities.push_back(std::move(rho));
  }
  curve.fisher_integral0 = trapezoid(fisher_samples, t_grid.front(), t_grid.back());
  return curve;
}

ShorttimeBound check_shorttime_bound(const MDensity& mu, const MDensity& nu,
                                     const ReferenceProcess& ref, double T,
                                     const SolverConfig& cfg,
                                     const GeodesicCurve* geodesic) {
  GeodesicCurve local;
  if (!geodesic) {
    std::vector<double> tg(33);
    for (int k = 0; k < 33; ++k) tg[k] = k / 32.0;
    local = displacement_geodesic(mu, nu, ref, tg);
    geodesic = &local;
  }
  SchrodingerPair p = sinkhorn_solve(mu, nu, T, ref, cfg);
  const double h_mu = relative_entropy(mu, ref.m());
  const double h_nu = relative_entropy(nu, ref.m());
  ShorttimeBound b;
  b.lower = 0.0;
  b.mid = T * entropic_cost(p) - 0.5 * geodesic->w2sq;
  b.upper = 0.5 * T * (h_mu + h_nu) + T * T / 8.0 * geodesic->fisher_integral0;
  return b;
}

std::array<double, 3> taylor_fit(const MDensity& mu, const MDensity& nu,
                                 const ReferenceProcess& ref,
                                 const std::vector<double>& Ts_small,
                                 const SolverConfig& cfg) {
  if (Ts_small.size() < 5) throw std::invalid_argument("taylor_fit: need >= 5 values");
  std::vector<double> y(Ts_small.size());
  std::vector<SchrodingerPair> pairs(Ts_small.size());
  // descend in T, warm-starting each solve from its neighbor
  std::vector<int> order(Ts_small.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return Ts_small[a] > Ts_small[b]; });
  const SchrodingerPair* warm = nullptr;
  for (int idx : order) {
    pairs[idx] = sinkhorn_solve(mu, nu, Ts_small[idx], ref, cfg, warm);
    warm = &pairs[idx];
    y[idx] = Ts_small[idx] * entropic_cost(pairs[idx]);
  }
  auto c = polyfit(Ts_small, y, 2);
  return {c[0], c[1], c[2]};
}

}  // namespace bridgelab
