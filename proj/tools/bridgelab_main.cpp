#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "bridgelab/experiments.hpp"
#include "bridgelab/report.hpp"
#include "bridgelab/version.hpp"

namespace {

int run_and_write(bridgelab::ExperimentConfig cfg, const std::string& outdir,
                  bool seed_override, std::uint64_t seed) {
  if (seed_override) cfg.seed = seed;
  bridgelab::RunReport rep;
  try {
    rep = cfg.experiment == "check" ? bridgelab::run_check_suite(cfg)
                                    : bridgelab::run_experiment(cfg);
  } catch (const bridgelab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  bridgelab::write_report(rep, outdir);
  int failed = 0;
  for (const auto& a : rep.assertions) {
    if (!a.pass) ++failed;
    std::printf("%-55s %s  (value %.6g, threshold %.6g)\n", a.name.c_str(),
                a.pass ? "PASS" : "FAIL", a.value, a.threshold);
  }
  std::printf("%s: %zu assertions, %d failed, %.1f s, report in %s\n",
              rep.experiment.c_str(), rep.assertions.size(), failed, rep.wallclock_s,
              outdir.c_str());
  return failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bridgelab: entropic transport laboratory on a 1-D grid"};
  app.set_version_flag("--version", bridgelab::kVersion);
  app.require_subcommand(1);

  std::string config_path, outdir = "out";
  std::uint64_t seed = 0;
  bool have_seed = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* copt = sub->add_option("--config", config_path, "experiment config (JSON)");
    if (config_required) copt->required();
    sub->add_option("--outdir", outdir, "output directory");
    sub->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { have_seed = true; });
  };

  const char* kinds[] = {"solve", "sweep", "shorttime", "longtime", "duality", "mfsp"};
  for (const char* kind : kinds) add_common(app.add_subcommand(kind, kind), true);

  auto* check = app.add_subcommand("check", "run a module invariant suite");
  std::string suite = "all";
  check->add_option("suite", suite,
                    "semigroup|bridge|derivatives|inequalities|shorttime|duality|"
                    "meanfield|all");
  add_common(check, false);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub->get_name() == "check") {
      bridgelab::ExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = bridgelab::load_config(config_path);
        if (cfg.experiment != "check")
          throw bridgelab::ConfigError("check: config must have experiment type 'check'");
        if (check->count("suite")) cfg.suite = suite;
      } else {
        cfg = bridgelab::default_check_config(suite, have_seed ? seed : 42);
      }
      return run_and_write(std::move(cfg), outdir, have_seed, seed);
    }
    bridgelab::ExperimentConfig cfg = bridgelab::load_config(config_path);
    if (cfg.experiment != sub->get_name())
      throw bridgelab::ConfigError("config experiment type '" + cfg.experiment +
                                   "' does not match subcommand '" + sub->get_name() +
                                   "'");
    return run_and_write(std::move(cfg), outdir, have_seed, seed);
  } catch (const bridgelab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
