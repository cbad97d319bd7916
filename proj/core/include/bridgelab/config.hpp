#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgelab/bridge.hpp"
#include "bridgelab/marginals.hpp"
#include "bridgelab/meanfield.hpp"
#include "bridgelab/reference.hpp"

namespace bridgelab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MarginalSpec {
  enum class Type { kGaussian, kMixture, kTabulated };
  Type type = Type::kGaussian;
  double mean = 0.0, var = 1.0;
  std::vector<MixtureComponent> components;
  std::string file;  // tabulated Lebesgue density at grid nodes
};

struct ExperimentConfig {
  // grid
  double a = -8.0, b = 8.0;
  int n = 801;
  // reference
  Backend backend = Backend::kOuExact;
  double kappa = 1.0;
  PotentialSpec::Type potential_type = PotentialSpec::Type::kOu;
  std::string potential_file;
  // marginals
  MarginalSpec mu, nu;
  std::optional<Window> window;
  // solver
  SolverConfig solver;
  // experiment
  std::string experiment;  // solve|sweep|shorttime|longtime|duality|mfsp|check
  double T = 1.0;
  std::vector<double> Ts;
  std::vector<double> taylor_Ts;
  int n_test_functions = 20;
  std::string suite = "all";
  InteractionPotential interaction = make_quadratic(1.0);
  MfspOptions mfsp;
  int mf_steps_per_unit = 32;
  // rng
  std::uint64_t seed = 42;

  std::string raw_json;  // canonical echo for hashing / reports
};

// Parses and validates a config file. Unknown keys, bad values and missing
// referenced files are all ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

// Built-in baseline used by `bridgelab check` (no config file needed).
ExperimentConfig default_check_config(const std::string& suite, std::uint64_t seed);

// Realize the configured objects.
Grid config_grid(const ExperimentConfig& cfg);
ReferenceProcess config_reference(const ExperimentConfig& cfg, const Grid& grid);
Marginal config_marginal(const ExperimentConfig& cfg, const MarginalSpec& spec,
                         const ReferenceProcess& ref);

}  // namespace bridgelab
