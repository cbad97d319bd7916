#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace bridgelab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum_k exp(v_k)) with the max-shift trick; empty or all -inf input gives -inf.
double logsumexp(std::span<const double> v);

// Same, over v_k + w_k.
double logsumexp2(std::span<const double> v, std::span<const double> w);

// Trapezoid weight on a uniform grid of `n` nodes covering an interval of length `len`.
std::vector<double> trapezoid_weights(int n, double len);

// Composite trapezoid of samples y on a uniform grid spanning [t0, t1].
double trapezoid(std::span<const double> y, double t0, double t1);

// Least-squares polynomial fit y ~ sum_k c_k x^k, degree `deg`; returns deg+1 coefficients.
// Throws std::invalid_argument when the system is rank-deficient (clustered abscissae).
std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int deg);

// Slope of the least-squares line through (x, y).
double fit_slope(std::span<const double> x, std::span<const double> y);

// Deterministic RNG. Draws never depend on the platform's distribution
// implementations: uniforms come straight from the engine bits and normals
// from an explicit Box-Muller transform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double normal();                        // standard normal, Box-Muller
  int uniform_int(int lo, int hi);        // inclusive bounds

  // Independent stream for instance k; streams do not collide for k < 2^32.
  Rng stream(std::uint64_t k) const;

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Runs fn(i) for i in [0, count). Uses up to BRIDGELAB_THREADS threads
// (default: hardware concurrency). Results must be written to per-index
// slots by the caller; the function itself imposes no ordering.
void parallel_for(int count, const std::function<void(int)>& fn);

// FNV-1a over a byte string, hex-encoded. Used for config hashes in reports.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace bridgelab
