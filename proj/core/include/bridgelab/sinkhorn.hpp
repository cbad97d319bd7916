#pragma once

#include <stdexcept>
#include <vector>

namespace bridgelab {

// Kernel seen by the static Schrödinger solver, in mass form: the coupling it
// produces is P_ij = exp(log_u_i + logK_ij + log_v_j).
class LogKernelOp {
 public:
  virtual ~LogKernelOp() = default;
  virtual int rows() const = 0;
  virtual int cols() const = 0;
  // out_i = log sum_j exp(logK_ij + x_j)
  virtual void apply(const std::vector<double>& x, std::vector<double>& out) const = 0;
  // out_j = log sum_i exp(logK_ij + x_i)
  virtual void apply_transpose(const std::vector<double>& x,
                               std::vector<double>& out) const = 0;
};

// Dense row-major log-kernel matrix.
class MatrixLogKernel final : public LogKernelOp {
 public:
  MatrixLogKernel(const std::vector<double>* logk, int n_rows, int n_cols)
      : logk_(logk), n_rows_(n_rows), n_cols_(n_cols) {}
  int rows() const override { return n_rows_; }
  int cols() const override { return n_cols_; }
  void apply(const std::vector<double>& x, std::vector<double>& out) const override;
  void apply_transpose(const std::vector<double>& x, std::vector<double>& out) const override;

 private:
  const std::vector<double>* logk_;
  int n_rows_, n_cols_;
};

struct DegenerateKernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SinkhornStatus { kConverged, kMaxIterExceeded };

struct SinkhornOptions {
  double tol = 1e-10;   // L1 marginal residual (mass form)
  int max_iter = 100000;
};

struct SinkhornResult {
  std::vector<double> log_u, log_v;
  double residual = 0.0;
  int iterations = 0;
  SinkhornStatus status = SinkhornStatus::kConverged;
  std::vector<double> residual_history;
};

// Alternating log-domain updates u = a/(K v), v = b/(K^T u) until the L1
// marginal residual drops below tol. log_a, log_b are log masses (-inf off
// support). Throws DegenerateKernelError when K e^{log_v} vanishes on all of
// supp(a). Deterministic; `warm` seeds the potentials.
SinkhornResult sinkhorn(const LogKernelOp& op, const std::vector<double>& log_a,
                        const std::vector<double>& log_b, const SinkhornOptions& opts,
                        const SinkhornResult* warm = nullptr);

}  // namespace bridgelab
