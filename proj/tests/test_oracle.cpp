#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bridgelab/numerics.hpp"
#include "oracle_polytope.hpp"

// Self-checks for the brute-force coupling oracle; it must stand on its own
// because the acceptance suite uses it to certify the solver.

TEST_CASE("oracle: uniform reference has the product coupling as optimum") {
  const int n = 4;
  std::vector<double> r(n * n, 1.0 / (n * n));
  std::vector<double> a = {0.1, 0.2, 0.3, 0.4};
  std::vector<double> b = {0.4, 0.3, 0.2, 0.1};
  auto res = oracle::minimize_entropy_over_polytope(r, a, b);
  CHECK(res.kkt_residual < 1e-10);
  // optimal coupling is a x b, value = sum over the product entropies
  double expect = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CHECK(res.coupling[i * n + j] == doctest::Approx(a[i] * b[j]).epsilon(1e-8));
      expect += a[i] * b[j] * std::log(a[i] * b[j] / r[i * n + j]);
    }
  CHECK(res.value == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("oracle: marginals are preserved and the value is stable") {
  bridgelab::Rng rng(99);
  for (int inst = 0; inst < 5; ++inst) {
    const int n = 5;
    std::vector<double> r(n * n), a(n), b(n);
    double sr = 0.0, sa = 0.0, sb = 0.0;
    for (auto& v : r) {
      v = 0.05 + rng.uniform();
      sr += v;
    }
    for (auto& v : r) v /= sr;
    for (int i = 0; i < n; ++i) {
      a[i] = 0.1 + rng.uniform();
      b[i] = 0.1 + rng.uniform();
      sa += a[i];
      sb += b[i];
    }
    for (int i = 0; i < n; ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    auto res = oracle::minimize_entropy_over_polytope(r, a, b);
    CHECK(res.kkt_residual < 1e-9);
    for (int i = 0; i < n; ++i) {
      double rs = 0.0, cs = 0.0;
      for (int j = 0; j < n; ++j) {
        rs += res.coupling[i * n + j];
        cs += res.coupling[j * n + i];
      }
      CHECK(rs == doctest::Approx(a[i]).epsilon(1e-10));
      CHECK(cs == doctest::Approx(b[i]).epsilon(1e-10));
    }
    // restarting from the solution does not move it
    auto res2 = oracle::minimize_entropy_over_polytope(r, a, b, 4000, 120);
    CHECK(res2.value == doctest::Approx(res.value).epsilon(1e-10));
  }
}
