#include "bridgelab/sinkhorn.hpp"

#include <cmath>
#include <limits>

#include "bridgelab/numerics.hpp"

namespace bridgelab {

void MatrixLogKernel::apply(const std::vector<double>& x, std::vector<double>& out) const {
  out.resize(n_rows_);
  for (int i = 0; i < n_rows_; ++i) {
    const double* row = logk_->data() + static_cast<std::size_t>(i) * n_cols_;
    double mx = kNegInf;
    for (int j = 0; j < n_cols_; ++j) {
      const double v = row[j] + x[j];
      if (v > mx) mx = v;
    }
    if (!std::isfinite(mx)) {
      out[i] = kNegInf;
      continue;
    }
    double s = 0.0;
    for (int j = 0; j < n_cols_; ++j) s += std::exp(row[j] + x[j] - mx);
    out[i] = mx + std::log(s);
  }
}

void MatrixLogKernel::apply_transpose(const std::vector<double>& x,
                                      std::vector<double>& out) const {
  out.assign(n_cols_, kNegInf);
  // column-wise max in one sweep, then the shifted accumulation
  for (int i = 0; i < n_rows_; ++i) {
    if (!std::isfinite(x[i])) continue;
    const double* row = logk_->data() + static_cast<std::size_t>(i) * n_cols_;
    for (int j = 0; j < n_cols_; ++j) {
      const double v = row[j] + x[i];
      if (v > out[j]) out[j] = v;
    }
  }
  std::vector<double> acc(n_cols_, 0.0);
  for (int i = 0; i < n_rows_; ++i) {
    if (!std::isfinite(x[i])) continue;
    const double* row = logk_->data() + static_cast<std::size_t>(i) * n_cols_;
    for (int j = 0; j < n_cols_; ++j) acc[j] += std::exp(row[j] + x[i] - out[j]);
  }
  for (int j = 0; j < n_cols_; ++j)
    out[j] = std::isfinite(out[j]) ? out[j] + std::log(acc[j]) : kNegInf;
}

SinkhornResult sinkhorn(const LogKernelOp& op, const std::vector<double>& log_a,
                        const std::vector<double>& log_b, const SinkhornOptions& opts,
                        const SinkhornResult* warm) {
  const int nr = op.rows(), nc = op.cols();
  SinkhornResult res;
  res.log_u.assign(nr, 0.0);
  res.log_v.assign(nc, 0.0);
  if (warm && static_cast<int>(warm->log_u.size()) == nr &&
      static_cast<int>(warm->log_v.size()) == nc) {
    res.log_u = warm->log_u;
    res.log_v = warm->log_v;
  } else {
    // start from v = b (mass form), u determined by the first half-sweep
    res.log_v = log_b;
  }
  for (int j = 0; j < nc; ++j)
    if (!std::isfinite(log_b[j])) res.log_v[j] = kNegInf;

  std::vector<double> kv(nr), ku(nc), a(nr);
  for (int i = 0; i < nr; ++i) a[i] = std::isfinite(log_a[i]) ? std::exp(log_a[i]) : 0.0;

  op.apply(res.log_v, kv);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    bool degenerate = true;
    for (int i = 0; i < nr; ++i) {
      if (!std::isfinite(log_a[i])) {
        res.log_u[i] = kNegInf;
        continue;
      }
      if (std::isfinite(kv[i])) degenerate = false;
      res.log_u[i] = log_a[i] - kv[i];
    }
    if (degenerate)
      throw DegenerateKernelError("sinkhorn: kernel mass vanishes on supp(a)");

    op.apply_transpose(res.log_u, ku);
    for (int j = 0; j < nc; ++j)
      res.log_v[j] = std::isfinite(log_b[j]) ? log_b[j] - ku[j] : kNegInf;

    // After the v-update the column marginal is exact; the L1 residual is the
    // row-side mismatch, whose K-apply seeds the next sweep.
    op.apply(res.log_v, kv);
    residual = 0.0;
    for (int i = 0; i < nr; ++i) {
      const double row = std::isfinite(res.log_u[i]) && std::isfinite(kv[i])
                             ? std::exp(res.log_u[i] + kv[i])
                             : 0.0;
      residual += std::abs(row - a[i]);
    }
    res.residual_history.push_back(residual);
    if (residual <= opts.tol) {
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.residual = residual;
  res.status = residual <= opts.tol ? SinkhornStatus::kConverged
                                    : SinkhornStatus::kMaxIterExceeded;
  return res;
}

}  // namespace bridgelab
