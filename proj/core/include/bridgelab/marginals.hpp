#pragma once

#include <optional>
#include <vector>

#include "bridgelab/grid.hpp"
#include "bridgelab/numerics.hpp"
#include "bridgelab/reference.hpp"

namespace bridgelab {

// Smooth compactly supported taper: 1 on [-flat, flat], cos^2 roll-off to
// zero at +-cut, 0 beyond. flat = cut disables the window.
struct Window {
  double flat = 3.5;
  double cut = 4.5;
  double value(double x) const;
  double dlog(double x) const;  // d/dx log value, on the open support
};

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double var = 1.0;
};

// Marginal mu = rho m built from a windowed Gaussian mixture; carries the
// analytic gradient of log rho for quadratures that need it.
struct Marginal {
  MDensity density;       // w.r.t. m
  GridFunction dlog;      // d/dx log(d mu / dm) where density > 0
  double entropy = 0.0;   // H(mu | m)
  double mean = 0.0;
  double second_moment = 0.0;
};

Marginal mixture_marginal(const ReferenceProcess& ref,
                          const std::vector<MixtureComponent>& comps,
                          std::optional<Window> window = std::nullopt);

Marginal gaussian_marginal(const ReferenceProcess& ref, double mean, double var,
                           std::optional<Window> window = std::nullopt);

// 1-3 component mixture with bounded parameters and support inside the bulk.
Marginal random_mixture(const ReferenceProcess& ref, Rng& rng);

// Windowed (possibly bimodal) Gaussian shape with the first two moments
// matched to (mean, m2) by a two-parameter shooting iteration. Lipschitz
// density with compact support, as the sharpness construction requires.
Marginal moment_matched_marginal(const ReferenceProcess& ref, double mean, double m2,
                                 bool bimodal = false);

}  // namespace bridgelab
