#include "bridgelab/reference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bridgelab/numerics.hpp"

namespace bridgelab {

namespace {
constexpr double kLogFloor = -745.0;  // below exp() underflow
}

PotentialSpec ou_potential(double kappa) {
  PotentialSpec s;
  s.type = PotentialSpec::Type::kOu;
  s.kappa = kappa;
  return s;
}

PotentialSpec tabulated_potential(double kappa, GridFunction values) {
  PotentialSpec s;
  s.type = PotentialSpec::Type::kTabulated;
  s.kappa = kappa;
  s.values = std::move(values);
  return s;
}

double ou_log_kernel(double kappa, double t, double x, double y) {
  if (t <= 0.0) throw std::invalid_argument("ou_kernel: need t > 0");
  const double emkt = -std::expm1(-kappa * t);       // 1 - e^{-kt}
  const double denom = 2.0 * std::expm1(kappa * t);  // 2(e^{kt} - 1)
  const double cross = std::exp(0.5 * kappa * t);
  return -0.5 * std::log(emkt) - kappa * (x * x - 2.0 * cross * x * y + y * y) / denom;
}

double ou_kernel(double kappa, double t, double x, double y) {
  return std::exp(ou_log_kernel(kappa, t, x, y));
}

double ReferenceProcess::log_kernel(double t, int i, int j) const {
  if (backend_ == Backend::kOuExact)
    return ou_log_kernel(kappa_, t, grid_.points[i], grid_.points[j]);
  // modes ordered by eigenvalue; the top one is the invariant mode, replaced
  // by its exact contribution 1
  const int n = grid_.n;
  double s = 0.0;
  for (int k = 0; k < n - 1; ++k)
    s += eigenvectors_[i * n + k] * eigenvectors_[j * n + k] * std::exp(t * eigenvalues_[k]);
  s = 1.0 + s / (sqrt_m_[i] * sqrt_m_[j]);
  return s > 0.0 ? std::log(s) : kLogFloor;
}

double ReferenceProcess::kernel(double t, int i, int j) const {
  return std::exp(log_kernel(t, i, j));
}

std::vector<double> ReferenceProcess::log_kernel_matrix(double t) const {
  const int n = grid_.n;
  std::vector<double> lk(static_cast<std::size_t>(n) * n);
  if (backend_ == Backend::kOuExact) {
    const double emkt = -std::expm1(-kappa_ * t);
    const double denom = 2.0 * std::expm1(kappa_ * t);
    const double cross = std::exp(0.5 * kappa_ * t);
    const double c0 = -0.5 * std::log(emkt);
    std::vector<double> sq(n);
    for (int i = 0; i < n; ++i) sq[i] = -kappa_ * grid_.points[i] * grid_.points[i] / denom;
    const double g = 2.0 * kappa_ * cross / denom;
    for (int i = 0; i < n; ++i) {
      const double xi = grid_.points[i];
      double* row = lk.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) row[j] = c0 + sq[i] + sq[j] + g * xi * grid_.points[j];
    }
    return lk;
  }
  // spectral: P_t = D^{-1} V e^{tL} V^T D, kernel = (V e^{tL} V^T)_{ij} / (sqrt(m_i m_j));
  // the invariant mode enters as its exact contribution 1
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> V(
      eigenvectors_.data(), n, n);
  Eigen::VectorXd scale(n);
  for (int k = 0; k < n; ++k) scale(k) = std::exp(t * eigenvalues_[k]);
  scale(n - 1) = 0.0;
  Eigen::MatrixXd M = V * scale.asDiagonal() * V.transpose();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p = 1.0 + M(i, j) / (sqrt_m_[i] * sqrt_m_[j]);
      lk[static_cast<std::size_t>(i) * n + j] = p > 0.0 ? std::log(p) : kLogFloor;
    }
  return lk;
}

GridFunction ReferenceProcess::spectral_apply(double t, const GridFunction& u) const {
  const int n = grid_.n;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> V(
      eigenvectors_.data(), n, n);
  // Deflate the invariant mode sqrt(m) exactly; otherwise eigenvector
  // roundoff amplified by 1/sqrt(m) in the tails spoils row-stochasticity.
  Eigen::Map<const Eigen::VectorXd> phi0(sqrt_m_.data(), n);
  const double nrm2 = phi0.squaredNorm();
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = sqrt_m_[i] * u[i];
  const double c = phi0.dot(w) / nrm2;
  w -= c * phi0;
  Eigen::VectorXd y = V.transpose() * w;
  for (int k = 0; k < n; ++k) y(k) *= std::exp(t * eigenvalues_[k]);
  Eigen::VectorXd z = V * y;
  GridFunction out(n);
  for (int i = 0; i < n; ++i) out[i] = c + z(i) / sqrt_m_[i];
  return out;
}

GridFunction ReferenceProcess::apply(double t, const GridFunction& u) const {
  const int n = grid_.n;
  if (static_cast<int>(u.size()) != n) throw std::invalid_argument("apply: size mismatch");
  if (t < 0.0) throw std::invalid_argument("apply: need t >= 0");
  if (t == 0.0) return u;
  if (backend_ == Backend::kSpectral) return spectral_apply(t, u);
  const double denom = 2.0 * std::expm1(kappa_ * t);
  const double cross = std::exp(0.5 * kappa_ * t);
  const double c0 = -0.5 * std::log(-std::expm1(-kappa_ * t));
  std::vector<double> base(n);
  for (int j = 0; j < n; ++j) {
    const double yj = grid_.points[j];
    base[j] = -kappa_ * yj * yj / denom;
  }
  GridFunction out(n);
  const double g = 2.0 * kappa_ * cross / denom;
  for (int i = 0; i < n; ++i) {
    const double xi = grid_.points[i];
    const double ci = c0 - kappa_ * xi * xi / denom;
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += std::exp(ci + base[j] + g * xi * grid_.points[j]) * m_[j] * u[j];
    out[i] = s;
  }
  return out;
}

GridFunction ReferenceProcess::log_apply(double t, const GridFunction& logu) const {
  GridFunction log_pu;
  log_apply_grad(t, logu, &log_pu, nullptr);
  return log_pu;
}

void ReferenceProcess::log_apply_grad(double t, const GridFunction& logu, GridFunction* log_pu,
                                      GridFunction* dlog_pu) const {
  const int n = grid_.n;
  if (static_cast<int>(logu.size()) != n)
    throw std::invalid_argument("log_apply: size mismatch");
  if (t < 0.0) throw std::invalid_argument("log_apply: need t >= 0");
  log_pu->assign(n, kNegInf);
  if (dlog_pu) dlog_pu->assign(n, 0.0);

  if (t == 0.0) {
    *log_pu = logu;
    if (dlog_pu) {
      GridFunction clean = logu;
      for (double& v : clean)
        if (!std::isfinite(v)) v = kLogFloor;
      *dlog_pu = grad(grid_, clean);
    }
    return;
  }

  if (backend_ == Backend::kSpectral) {
    double mx = kNegInf;
    for (double v : logu) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return;  // all mass zero: log P_t 0 = -inf
    GridFunction u(n);
    for (int i = 0; i < n; ++i)
      u[i] = std::isfinite(logu[i]) ? std::exp(logu[i] - mx) : 0.0;
    GridFunction v = spectral_apply(t, u);
    for (int i = 0; i < n; ++i) (*log_pu)[i] = v[i] > 0.0 ? std::log(v[i]) + mx : kNegInf;
    if (dlog_pu) {
      GridFunction clean = *log_pu;
      for (double& w : clean)
        if (!std::isfinite(w)) w = kLogFloor;
      *dlog_pu = grad(grid_, clean);
    }
    return;
  }

  // OU: row-wise log-sum-exp of log p_t(x_i, .) + log m + logu, with the exact
  // kernel gradient d/dx log p_t(x, y) = -kappa (x - e^{kt/2} y) / (e^{kt} - 1).
  const double ekt1 = std::expm1(kappa_ * t);  // e^{kt} - 1
  const double denom = 2.0 * ekt1;
  const double cross = std::exp(0.5 * kappa_ * t);
  const double c0 = -0.5 * std::log(-std::expm1(-kappa_ * t));
  std::vector<double> base(n);
  for (int j = 0; j < n; ++j) {
    const double yj = grid_.points[j];
    base[j] = -kappa_ * yj * yj / denom + log_m_[j] + logu[j];
  }
  const double g = 2.0 * kappa_ * cross / denom;
  std::vector<double> row(n);
  for (int i = 0; i < n; ++i) {
    const double xi = grid_.points[i];
    const double ci = c0 - kappa_ * xi * xi / denom;
    double mx = kNegInf;
    for (int j = 0; j < n; ++j) {
      row[j] = base[j] + g * xi * grid_.points[j];
      if (row[j] > mx) mx = row[j];
    }
    if (!std::isfinite(mx)) continue;
    double s = 0.0, sy = 0.0;
    for (int j = 0; j < n; ++j) {
      const double r = std::exp(row[j] - mx);
      s += r;
      sy += r * grid_.points[j];
    }
    (*log_pu)[i] = ci + mx + std::log(s);
    if (dlog_pu) (*dlog_pu)[i] = -kappa_ * (xi - cross * sy / s) / ekt1;
  }
}

MDensity ReferenceProcess::stationary_density() const {
  return MDensity{std::vector<double>(grid_.n, 1.0)};
}

ReferenceProcess build_reference(const Grid& grid, double kappa, const PotentialSpec& spec,
                                 Backend backend) {
  ReferenceProcess ref;
  ref.grid_ = grid;
  ref.kappa_ = kappa;
  ref.backend_ = backend;
  const int n = grid.n;

  ref.potential_.resize(n);
  if (spec.type == PotentialSpec::Type::kOu) {
    for (int i = 0; i < n; ++i)
      ref.potential_[i] = spec.kappa * grid.points[i] * grid.points[i] / 4.0;
  } else {
    if (static_cast<int>(spec.values.size()) != n)
      throw std::invalid_argument("build_reference: tabulated potential size mismatch");
    ref.potential_ = spec.values;
    // discrete curvature check: 2U'' >= kappa - 1e-6 in the interior
    for (int i = 1; i < n - 1; ++i) {
      const double upp =
          (ref.potential_[i + 1] - 2.0 * ref.potential_[i] + ref.potential_[i - 1]) /
          (grid.h * grid.h);
      if (2.0 * upp < kappa - 1e-6)
        throw std::invalid_argument("build_reference: curvature check 2U'' >= kappa failed");
    }
  }

  double umin = ref.potential_[0];
  for (double u : ref.potential_) umin = std::min(umin, u);
  ref.m_.resize(n);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    ref.m_[i] = grid.quad[i] * std::exp(-2.0 * (ref.potential_[i] - umin));
    z += ref.m_[i];
  }
  if (!(z > 0.0) || !std::isfinite(z))
    throw std::invalid_argument("build_reference: non-normalizable invariant measure");
  ref.log_m_.resize(n);
  for (int i = 0; i < n; ++i) {
    ref.m_[i] /= z;
    ref.log_m_[i] = std::log(ref.m_[i]);
  }

  if (backend == Backend::kSpectral) {
    // Finite-volume generator L = (1/(2 rho q_i)) d(rho d.); flux form keeps
    // zero row sums and m-detailed balance exact at matrix level.
    std::vector<double> cellm(n);  // quad_i * rho_i, un-normalized cell masses
    for (int i = 0; i < n; ++i)
      cellm[i] = grid.quad[i] * std::exp(-2.0 * (ref.potential_[i] - umin));
    std::vector<double> face(n - 1);  // rho at half nodes, geometric mean
    for (int i = 0; i + 1 < n; ++i)
      face[i] = std::exp(-(ref.potential_[i] + ref.potential_[i + 1]) + 2.0 * umin);

    std::vector<double> diag(n, 0.0), sub(n - 1, 0.0);
    const double h = grid.h;
    for (int i = 0; i + 1 < n; ++i) {
      sub[i] = face[i] / (2.0 * h * std::sqrt(cellm[i] * cellm[i + 1]));
      diag[i] -= face[i] / (2.0 * h * cellm[i]);
      diag[i + 1] -= face[i] / (2.0 * h * cellm[i + 1]);
    }

    Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(diag.data(), n);
    Eigen::VectorXd s = Eigen::Map<Eigen::VectorXd>(sub.data(), n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, s, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("build_reference: eigendecomposition failed");

    ref.eigenvalues_.resize(n);
    for (int k = 0; k < n; ++k) ref.eigenvalues_[k] = std::min(es.eigenvalues()(k), 0.0);
    ref.eigenvectors_.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        ref.eigenvectors_[static_cast<std::size_t>(i) * n + k] = es.eigenvectors()(i, k);
    ref.sqrt_m_.resize(n);
    for (int i = 0; i < n; ++i) ref.sqrt_m_[i] = std::sqrt(ref.m_[i]);
  }
  return ref;
}

CheckReport bakry_emery_check(const ReferenceProcess& ref, double t, const GridFunction& u) {
  const Grid& grid = ref.grid();
  const int n = grid.n;
  GridFunction pu = ref.apply(t, u);
  GridFunction dpu = grad(grid, pu);
  GridFunction du = grad(grid, u);
  GridFunction du2(n);
  for (int i = 0; i < n; ++i) du2[i] = du[i] * du[i];
  GridFunction pdu2 = ref.apply(t, du2);
  const double decay = std::exp(-ref.kappa() * t);
  const double bulk = 0.5 * std::max(std::abs(grid.a), std::abs(grid.b));
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    if (std::abs(grid.points[i]) <= bulk) scale = std::max(scale, decay * pdu2[i]);
  CheckReport rep;
  rep.name = "bakry_emery";
  rep.slack = 1e-3 * std::max(scale, 1e-12);
  double worst = -1e300;
  for (int i = 0; i < n; ++i) {
    if (std::abs(grid.points[i]) > bulk) continue;
    ++rep.points;
    worst = std::max(worst, dpu[i] * dpu[i] - decay * pdu2[i] - rep.slack);
  }
  rep.max_violation = worst;
  return rep;
}

CheckReport kernel_lower_bound_check(const ReferenceProcess& ref, double t) {
  const Grid& grid = ref.grid();
  const int n = grid.n;
  const double kappa = ref.kappa();
  const double bulk = 0.5 * std::max(std::abs(grid.a), std::abs(grid.b));
  CheckReport rep;
  rep.name = "kernel_lower_bound";
  rep.slack = 1e-9;
  double worst = -1e300;
  const double denom = 2.0 * std::expm1(0.5 * kappa * t);
  const int stride = std::max(1, n / 200);  // scan on a subsampled lattice
  for (int i = 0; i < n; i += stride) {
    if (std::abs(grid.points[i]) > bulk) continue;
    for (int j = 0; j < n; j += stride) {
      if (std::abs(grid.points[j]) > bulk) continue;
      const double d = grid.points[i] - grid.points[j];
      const double lower = std::exp(-kappa * d * d / denom);
      const double p = ref.kernel(t, i, j);
      ++rep.points;
      worst = std::max(worst, lower - p - rep.slack);
    }
  }
  rep.max_violation = worst;
  return rep;
}

}  // namespace bridgelab
