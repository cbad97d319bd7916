#include "bridgelab/meanfield.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bridgelab/numerics.hpp"

namespace bridgelab {

double InteractionPotential::value(double z) const {
  const double q = 0.25 * kappa * z * z;
  return type == Type::kQuadratic ? q : q + eps * z * z * z * z;
}

double InteractionPotential::dvalue(double z) const {
  const double q = 0.5 * kappa * z;
  return type == Type::kQuadratic ? q : q + 4.0 * eps * z * z * z;
}

double InteractionPotential::d2value(double z) const {
  const double q = 0.5 * kappa;
  return type == Type::kQuadratic ? q : q + 12.0 * eps * z * z;
}

InteractionPotential make_quadratic(double kappa) {
  InteractionPotential w;
  w.type = InteractionPotential::Type::kQuadratic;
  w.kappa = kappa;
  return w;
}

InteractionPotential make_quadratic_quartic(double kappa, double eps) {
  InteractionPotential w;
  w.type = InteractionPotential::Type::kQuadraticQuartic;
  w.kappa = kappa;
  w.eps = eps;
  return w;
}

void validate_interaction(const InteractionPotential& w, const Grid& grid) {
  if (!(w.kappa > 0.0))
    throw std::invalid_argument("interaction: needs kappa > 0");
  if (w.eps < 0.0) throw std::invalid_argument("interaction: needs eps >= 0");
  const double range = grid.b - grid.a;
  const int kZ = 257;
  for (int k = 0; k < kZ; ++k) {
    const double z = -range + 2.0 * range * k / (kZ - 1);
    if (std::abs(w.value(z) - w.value(-z)) > 1e-12 * (1.0 + std::abs(w.value(z))))
      throw std::invalid_argument("interaction: potential not symmetric");
    if (2.0 * w.d2value(z) < w.kappa - 1e-9)
      throw std::invalid_argument("interaction: convexity floor 2W'' >= kappa violated");
  }
}

GridFunction interaction_drift(const Grid& grid, const InteractionPotential& w,
                               const std::vector<double>& rho_lebesgue) {
  const int n = grid.n;
  GridFunction b(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += w.dvalue(grid.points[i] - grid.points[j]) * rho_lebesgue[j] * grid.quad[j];
    b[i] = -s;
  }
  return b;
}

double free_energy(const Grid& grid, const InteractionPotential& w,
                   const std::vector<double>& sigma_lebesgue) {
  const int n = grid.n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) mass += sigma_lebesgue[i] * grid.quad[i];
  if (std::abs(mass - 1.0) > 1e-8)
    throw std::invalid_argument("free_energy: density not normalized");
  double ent = 0.0, inter = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = sigma_lebesgue[i];
    if (s > 0.0) ent += s * std::log(s) * grid.quad[i];
    if (s <= 0.0) continue;
    double conv = 0.0;
    for (int j = 0; j < n; ++j)
      conv += w.value(grid.points[i] - grid.points[j]) * sigma_lebesgue[j] * grid.quad[j];
    inter += conv * s * grid.quad[i];
  }
  return ent + inter;
}

namespace {

// objective on mass vectors p (p_i = sigma_i quad_i):
//   G(p) = sum p log(p/quad) + p^T Wm p,  Wm_ij = W(x_i - x_j)
struct MassObjective {
  const Grid* grid;
  Eigen::MatrixXd wm;

  double eval(const Eigen::VectorXd& p) const {
    double s = p.dot(wm * p);
    for (int i = 0; i < grid->n; ++i)
      if (p(i) > 0.0) s += p(i) * std::log(p(i) / grid->quad[i]);
    return s;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& p) const {
    Eigen::VectorXd g = 2.0 * (wm * p);
    for (int i = 0; i < grid->n; ++i) g(i) += std::log(p(i) / grid->quad[i]) + 1.0;
    return g;
  }
};

}  // namespace

FreeEnergyShift free_energy_minimum(const Grid& grid, const InteractionPotential& w,
                                    double barycenter) {
  validate_interaction(w, grid);
  const int n = grid.n;
  MassObjective obj;
  obj.grid = &grid;
  obj.wm.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) obj.wm(i, j) = w.value(grid.points[i] - grid.points[j]);

  // start from the Gaussian with the interaction's own curvature scale
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid.points[i] - barycenter;
    p(i) = std::exp(-0.5 * w.kappa * x * x) * grid.quad[i];
  }
  p /= p.sum();

  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(grid.points.data(), n);
  auto project = [&](Eigen::VectorXd g) {
    // remove the span{1, x} component (Euclidean least squares, 2x2 Gram)
    const double s1 = g.sum(), sx = g.dot(x);
    const double a11 = n, a12 = x.sum(), a22 = x.squaredNorm();
    const double det = a11 * a22 - a12 * a12;
    const double l0 = (a22 * s1 - a12 * sx) / det;
    const double l1 = (-a12 * s1 + a11 * sx) / det;
    for (int i = 0; i < n; ++i) g(i) -= l0 + l1 * x(i);
    return g;
  };

  // Multiplicative (entropic-geometry) descent: the stationarity condition is
  // p ~ quad * exp(-2 Wm p + l1 x), with l1 tilting the barycenter back to the
  // target. Euclidean steps stall against the positivity wall at the tails.
  double fval = obj.eval(p);
  double l1 = 0.0, gamma = 0.5;
  double prev_res = 1e300;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd u(n);
    Eigen::VectorXd wp = obj.wm * p;
    for (int i = 0; i < n; ++i) u(i) = std::log(grid.quad[i]) - 2.0 * wp(i);
    // tilt so the candidate has the required barycenter (Newton in l1)
    Eigen::VectorXd cand(n);
    for (int nit = 0; nit < 60; ++nit) {
      double mx = -1e300;
      for (int i = 0; i < n; ++i) mx = std::max(mx, u(i) + l1 * x(i));
      double z = 0.0, zx = 0.0, zxx = 0.0;
      for (int i = 0; i < n; ++i) {
        cand(i) = std::exp(u(i) + l1 * x(i) - mx);
        z += cand(i);
        zx += cand(i) * x(i);
        zxx += cand(i) * x(i) * x(i);
      }
      const double mean = zx / z;
      const double var = zxx / z - mean * mean;
      const double f = mean - barycenter;
      if (std::abs(f) < 1e-13) break;
      l1 -= f / std::max(var, 1e-12);
    }
    cand /= cand.sum();
    double res = 0.0;
    for (int i = 0; i < n; ++i) res += std::abs(cand(i) - p(i));
    if (res > prev_res) gamma = std::max(0.5 * gamma, 1.0 / 16.0);
    prev_res = res;
    p = (1.0 - gamma) * p + gamma * cand;
    p /= p.sum();
    if (res < 1e-12) break;
  }
  fval = obj.eval(p);

  // Newton polish on the KKT system with constraints [1; x]
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd g = obj.gradient(p);
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 2, n + 2);
    kkt.topLeftCorner(n, n) = 2.0 * obj.wm;
    for (int i = 0; i < n; ++i) kkt(i, i) += 1.0 / p(i);
    for (int i = 0; i < n; ++i) {
      kkt(i, n) = kkt(n, i) = 1.0;
      kkt(i, n + 1) = kkt(n + 1, i) = x(i);
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 2);
    rhs.head(n) = -g;
    Eigen::VectorXd sol = kkt.ldlt().solve(rhs);
    Eigen::VectorXd d = sol.head(n);
    if (d.lpNorm<Eigen::Infinity>() < 1e-15) break;
    double step = 1.0;
    for (int bt = 0; bt < 50; ++bt, step *= 0.5) {
      Eigen::VectorXd q = p + step * d;
      if (q.minCoeff() <= 0.0) continue;
      const double fq = obj.eval(q);
      if (fq <= fval + 1e-14) {
        p = q;
        fval = fq;
        break;
      }
    }
    if (project(obj.gradient(p)).lpNorm<Eigen::Infinity>() < 1e-11) break;
  }

  FreeEnergyShift out;
  out.min_value = fval;
  out.minimizer_leb.resize(n);
  for (int i = 0; i < n; ++i) out.minimizer_leb[i] = p(i) / grid.quad[i];
  return out;
}

double free_energy_shifted(const Grid& grid, const InteractionPotential& w,
                           const std::vector<double>& sigma_lebesgue,
                           const FreeEnergyShift& shift) {
  return free_energy(grid, w, sigma_lebesgue) - shift.min_value;
}

std::vector<double> lebesgue_density(const Grid& grid, const std::vector<double>& m_weights,
                                     const MDensity& rho) {
  std::vector<double> leb(grid.n);
  for (int i = 0; i < grid.n; ++i) leb[i] = rho.values[i] * m_weights[i] / grid.quad[i];
  return leb;
}

namespace {

// One Euler-Maruyama step kernel per time slice, stored as a row-stochastic
// band matrix (Gaussian bandwidth sqrt(dt), 8 sigma support).
struct StepKernel {
  int half = 0;
  std::vector<int> start;       // first column of each row's band
  std::vector<double> weights;  // rows * (2 half + 1), row-normalized masses
};

StepKernel build_step(const Grid& grid, const GridFunction& drift, double dt) {
  const int n = grid.n;
  StepKernel k;
  k.half = std::max(2, static_cast<int>(std::ceil(8.0 * std::sqrt(dt) / grid.h)));
  const int width = 2 * k.half + 1;
  k.start.assign(n, 0);
  k.weights.assign(static_cast<std::size_t>(n) * width, 0.0);
  for (int i = 0; i < n; ++i) {
    const double c = grid.points[i] + drift[i] * dt;
    int ic = static_cast<int>(std::lround((c - grid.a) / grid.h));
    ic = std::clamp(ic, 0, n - 1);
    int lo = std::max(0, ic - k.half), hi = std::min(n - 1, ic + k.half);
    k.start[i] = lo;
    double sum = 0.0;
    double* row = k.weights.data() + static_cast<std::size_t>(i) * width;
    for (int j = lo; j <= hi; ++j) {
      const double d = grid.points[j] - c;
      row[j - lo] = std::exp(-0.5 * d * d / dt) * grid.quad[j];
      sum += row[j - lo];
    }
    for (int j = lo; j <= hi; ++j) row[j - lo] /= sum;
  }
  return k;
}

void step_apply(const StepKernel& k, const std::vector<double>& in,
                std::vector<double>& out) {
  const int n = static_cast<int>(in.size());
  const int width = 2 * k.half + 1;
  out.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* row = k.weights.data() + static_cast<std::size_t>(i) * width;
    const int lo = k.start[i];
    const int hi = std::min(n - 1, lo + width - 1);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += row[j - lo] * in[j];
    out[i] = s;
  }
}

void step_apply_transpose(const StepKernel& k, const std::vector<double>& in,
                          std::vector<double>& out) {
  const int n = static_cast<int>(in.size());
  const int width = 2 * k.half + 1;
  out.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (in[i] == 0.0) continue;
    const double* row = k.weights.data() + static_cast<std::size_t>(i) * width;
    const int lo = k.start[i];
    const int hi = std::min(n - 1, lo + width - 1);
    for (int j = lo; j <= hi; ++j) out[j] += row[j - lo] * in[i];
  }
}

// K_{0T} = G_0 G_1 ... G_{K-1} exposed to the static solver through scaled
// linear chain applies.
class ChainLogKernel final : public LogKernelOp {
 public:
  ChainLogKernel(const std::vector<StepKernel>* steps, int n) : steps_(steps), n_(n) {}
  int rows() const override { return n_; }
  int cols() const override { return n_; }

  void apply(const std::vector<double>& xlog, std::vector<double>& out) const override {
    chain(xlog, out, false);
  }
  void apply_transpose(const std::vector<double>& xlog,
                       std::vector<double>& out) const override {
    chain(xlog, out, true);
  }

 private:
  void chain(const std::vector<double>& xlog, std::vector<double>& out,
             bool transpose) const {
    double mx = kNegInf;
    for (double v : xlog) mx = std::max(mx, v);
    out.assign(n_, kNegInf);
    if (!std::isfinite(mx)) return;
    std::vector<double> w(n_), tmp(n_);
    for (int i = 0; i < n_; ++i)
      w[i] = std::isfinite(xlog[i]) ? std::exp(xlog[i] - mx) : 0.0;
    double logscale = mx;
    const int K = static_cast<int>(steps_->size());
    for (int s = 0; s < K; ++s) {
      const StepKernel& g = transpose ? (*steps_)[s] : (*steps_)[K - 1 - s];
      if (transpose)
        step_apply_transpose(g, w, tmp);
      else
        step_apply(g, w, tmp);
      std::swap(w, tmp);
      double total = 0.0;
      for (double v : w) total += v;
      if (!(total > 0.0)) return;  // all -inf
      for (double& v : w) v /= total;
      logscale += std::log(total);
    }
    for (int i = 0; i < n_; ++i) out[i] = w[i] > 0.0 ? std::log(w[i]) + logscale : kNegInf;
  }

  const std::vector<StepKernel>* steps_;
  int n_;
};

double barycenter_of(const Grid& grid, const std::vector<double>& leb) {
  double b = 0.0;
  for (int i = 0; i < grid.n; ++i) b += grid.points[i] * leb[i] * grid.quad[i];
  return b;
}

}  // namespace

MeanFieldSolution mfsp_solve(const Grid& grid, const InteractionPotential& w,
                             const std::vector<double>& mu_leb,
                             const std::vector<double>& nu_leb, double T,
                             const MfspOptions& opts, double f_mu) {
  validate_interaction(w, grid);
  if (opts.steps < 16) throw std::invalid_argument("mfsp_solve: need K >= 16");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw std::invalid_argument("mfsp_solve: damping in (0, 1]");
  const int n = grid.n;
  const int K = opts.steps;
  const double dt = T / K;

  const double b_mu = barycenter_of(grid, mu_leb), b_nu = barycenter_of(grid, nu_leb);
  if (std::abs(b_mu - b_nu) > 1e-6)
    throw std::invalid_argument("mfsp_solve: marginals must share the barycenter");

  MeanFieldSolution sol;
  sol.flow.assign(K + 1, std::vector<double>(n));
  for (int k = 0; k <= K; ++k) {
    const double t = static_cast<double>(k) / K;
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
      sol.flow[k][i] = (1.0 - t) * mu_leb[i] + t * nu_leb[i];
      mass += sol.flow[k][i] * grid.quad[i];
    }
    for (double& v : sol.flow[k]) v /= mass;
  }

  std::vector<double> log_a(n), log_b(n);
  for (int i = 0; i < n; ++i) {
    log_a[i] = mu_leb[i] > 0.0 ? std::log(mu_leb[i] * grid.quad[i]) : kNegInf;
    log_b[i] = nu_leb[i] > 0.0 ? std::log(nu_leb[i] * grid.quad[i]) : kNegInf;
  }

  double lambda = opts.damping;
  double prev_residual = 1e300;
  int stall = 0;
  SinkhornResult warm;
  bool have_warm = false;
  std::vector<StepKernel> steps(K);

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    sol.drifts.assign(K, GridFunction());
    for (int k = 0; k < K; ++k)
      sol.drifts[k] = interaction_drift(grid, w, sol.flow[k]);
    for (int k = 0; k < K; ++k) steps[k] = build_step(grid, sol.drifts[k], dt);

    ChainLogKernel op(&steps, n);
    SinkhornOptions sopts;
    sopts.tol = opts.static_tol;
    sopts.max_iter = opts.static_max_iter;
    SinkhornResult res = sinkhorn(op, log_a, log_b, sopts, have_warm ? &warm : nullptr);
    warm = res;
    have_warm = true;
    sol.static_residual = res.residual;

    // forward/backward sweeps give every intermediate marginal
    std::vector<std::vector<double>> fwd(K + 1, std::vector<double>(n));
    std::vector<std::vector<double>> bwd(K + 1, std::vector<double>(n));
    std::vector<double> flog(K + 1, 0.0), blog(K + 1, 0.0);
    double mxu = kNegInf, mxv = kNegInf;
    for (int i = 0; i < n; ++i) {
      mxu = std::max(mxu, res.log_u[i]);
      mxv = std::max(mxv, res.log_v[i]);
    }
    for (int i = 0; i < n; ++i) {
      fwd[0][i] = std::isfinite(res.log_u[i]) ? std::exp(res.log_u[i] - mxu) : 0.0;
      bwd[K][i] = std::isfinite(res.log_v[i]) ? std::exp(res.log_v[i] - mxv) : 0.0;
    }
    std::vector<double> tmp(n);
    for (int k = 0; k < K; ++k) {
      step_apply_transpose(steps[k], fwd[k], tmp);
      double total = 0.0;
      for (double v : tmp) total += v;
      flog[k + 1] = flog[k] + std::log(total);
      for (int i = 0; i < n; ++i) fwd[k + 1][i] = tmp[i] / total;
    }
    for (int k = K - 1; k >= 0; --k) {
      step_apply(steps[k], bwd[k + 1], tmp);
      double total = 0.0;
      for (double v : tmp) total += v;
      blog[k] = blog[k + 1] + std::log(total);
      for (int i = 0; i < n; ++i) bwd[k][i] = tmp[i] / total;
    }

    double residual = 0.0;
    std::vector<std::vector<double>> next(K + 1, std::vector<double>(n));
    sol.max_barycenter_dev = 0.0;
    for (int k = 0; k <= K; ++k) {
      double mass = 0.0;
      for (int i = 0; i < n; ++i) {
        next[k][i] = fwd[k][i] * bwd[k][i];  // node masses up to a common scale
        mass += next[k][i];
      }
      double l1 = 0.0;
      for (int i = 0; i < n; ++i) {
        next[k][i] /= mass * grid.quad[i];  // node mass -> Lebesgue density
        l1 += std::abs(next[k][i] - sol.flow[k][i]) * grid.quad[i];
      }
      residual = std::max(residual, l1);
      sol.max_barycenter_dev =
          std::max(sol.max_barycenter_dev, std::abs(barycenter_of(grid, next[k]) - b_mu));
    }
    sol.residual_history.push_back(residual);
    sol.fixed_point_residual = residual;

    if (residual > prev_residual) {
      lambda = std::max(lambda * 0.5, 1.0 / 16.0);
      if (lambda <= 1.0 / 16.0 + 1e-12) ++stall;
      if (stall > 5) break;  // NoConvergence: history returned to the caller
    }
    prev_residual = residual;

    for (int k = 0; k <= K; ++k) {
      double mass = 0.0;
      for (int i = 0; i < n; ++i) {
        sol.flow[k][i] = lambda * next[k][i] + (1.0 - lambda) * sol.flow[k][i];
        mass += sol.flow[k][i] * grid.quad[i];
      }
      for (double& v : sol.flow[k]) v /= mass;
    }

    if (residual <= opts.tol) {
      sol.converged = true;
      break;
    }
  }
  sol.damping_used = lambda;

  // H(pi | mu x K) from the potentials and the marginal constraints
  double ce = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(log_a[i]))
      ce += std::exp(log_a[i]) * (warm.log_u[i] - log_a[i]);
    if (std::isfinite(log_b[i])) ce += std::exp(log_b[i]) * warm.log_v[i];
  }
  sol.coupling_entropy = ce;
  sol.mf_cost = f_mu + ce;
  return sol;
}

MfCostRefined mfsp_cost_extrapolated(const Grid& grid, const InteractionPotential& w,
                                     const std::vector<double>& mu_leb,
                                     const std::vector<double>& nu_leb, double T,
                                     const MfspOptions& opts, double f_mu) {
  MeanFieldSolution coarse = mfsp_solve(grid, w, mu_leb, nu_leb, T, opts, f_mu);
  MfspOptions fine_opts = opts;
  fine_opts.steps = 2 * opts.steps;
  MeanFieldSolution fine = mfsp_solve(grid, w, mu_leb, nu_leb, T, fine_opts, f_mu);
  MfCostRefined out;
  out.mf_cost = 2.0 * fine.mf_cost - coarse.mf_cost;
  out.coupling_entropy = 2.0 * fine.coupling_entropy - coarse.coupling_entropy;
  out.fine = std::move(fine);
  return out;
}

MfLongtimeReport check_mf_longtime(const Grid& grid, const InteractionPotential& w,
                                   const std::vector<double>& mu_leb,
                                   const std::vector<double>& nu_leb,
                                   const std::vector<double>& Ts, int steps_per_unit,
                                   const MfspOptions& opts, double f_mu, double f_nu) {
  MfLongtimeReport rep;
  rep.Ts = Ts;
  const double kappa = w.kappa;
  std::vector<double> fit_t, fit_lg;
  for (double T : Ts) {
    MfspOptions o = opts;
    o.steps = std::max(opts.steps, static_cast<int>(std::ceil(steps_per_unit * T)));
    MfCostRefined r = mfsp_cost_extrapolated(grid, w, mu_leb, nu_leb, T, o, f_mu);
    const double gap = std::abs(r.mf_cost - f_mu - f_nu);
    rep.mf_costs.push_back(r.mf_cost);
    rep.gaps.push_back(gap);
    if (gap > 1e-10) {
      fit_t.push_back(T);
      fit_lg.push_back(std::log(gap));
    }
    const double rhs = f_mu / -std::expm1(-0.5 * kappa * T) +
                       f_nu / -std::expm1(-0.5 * kappa * T);
    rep.talagrand_margin = std::min(rep.talagrand_margin, rhs - r.mf_cost);
  }
  if (fit_t.size() >= 2) rep.fitted_slope = fit_slope(fit_t, fit_lg);
  return rep;
}

}  // namespace bridgelab
