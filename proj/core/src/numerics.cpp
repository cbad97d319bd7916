#include "bridgelab/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace bridgelab {

double logsumexp(std::span<const double> v) {
  double mx = kNegInf;
  for (double x : v)
    if (x > mx) mx = x;
  if (!std::isfinite(mx)) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

double logsumexp2(std::span<const double> v, std::span<const double> w) {
  const std::size_t n = v.size();
  double mx = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = v[i] + w[i];
    if (x > mx) mx = x;
  }
  if (!std::isfinite(mx)) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] + w[i] - mx);
  return mx + std::log(s);
}

std::vector<double> trapezoid_weights(int n, double len) {
  if (n < 2) throw std::invalid_argument("trapezoid_weights: need n >= 2");
  const double h = len / (n - 1);
  std::vector<double> w(n, h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  return w;
}

double trapezoid(std::span<const double> y, double t0, double t1) {
  const int n = static_cast<int>(y.size());
  if (n < 2) throw std::invalid_argument("trapezoid: need >= 2 samples");
  const double h = (t1 - t0) / (n - 1);
  double s = 0.5 * (y[0] + y[n - 1]);
  for (int i = 1; i < n - 1; ++i) s += y[i];
  return s * h;
}

std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int deg) {
  const int n = static_cast<int>(x.size());
  if (n < deg + 1) throw std::invalid_argument("polyfit: not enough points");
  Eigen::MatrixXd A(n, deg + 1);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= deg; ++k) {
      A(i, k) = p;
      p *= x[i];
    }
    b(i) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < deg + 1)
    throw std::invalid_argument("polyfit: abscissae too clustered (rank-deficient fit)");
  Eigen::VectorXd c = qr.solve(b);
  return std::vector<double>(c.data(), c.data() + deg + 1);
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  return polyfit(x, y, 1)[1];
}

std::uint64_t Rng::next_u64() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

int Rng::uniform_int(int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

Rng Rng::stream(std::uint64_t k) const {
  Rng probe = *this;
  const std::uint64_t base = probe.next_u64();
  return Rng(base ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
}

namespace {
int thread_cap() {
  if (const char* env = std::getenv("BRIDGELAB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}
}  // namespace

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(count, thread_cap());
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace bridgelab
