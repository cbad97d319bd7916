#pragma once

#include <string>

#include "bridgelab/config.hpp"
#include "bridgelab/report.hpp"

namespace bridgelab {

// Runs the configured experiment; does not write files.
RunReport run_experiment(const ExperimentConfig& cfg);

// Runs one of the module invariant suites (or "all") with default instances.
RunReport run_check_suite(const ExperimentConfig& cfg);

}  // namespace bridgelab
