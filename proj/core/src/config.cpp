#include "bridgelab/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bridgelab {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

double get_num(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw ConfigError(where + ": missing numeric '" + key + "'");
  return obj[key].get<double>();
}

MarginalSpec parse_marginal(const json& j, const std::string& where) {
  MarginalSpec spec;
  require_keys(j, where, {"type", "mean", "var", "components", "file"});
  const std::string type = j.value("type", "");
  if (type == "gaussian") {
    spec.type = MarginalSpec::Type::kGaussian;
    spec.mean = get_num(j, "mean", where);
    spec.var = get_num(j, "var", where);
    if (!(spec.var > 0.0)) throw ConfigError(where + ": var must be positive");
  } else if (type == "mixture") {
    spec.type = MarginalSpec::Type::kMixture;
    if (!j.contains("components") || !j["components"].is_array() || j["components"].empty())
      throw ConfigError(where + ": mixture needs a non-empty components array");
    for (const auto& c : j["components"]) {
      require_keys(c, where + ".components[]", {"weight", "mean", "var"});
      MixtureComponent mc;
      mc.weight = get_num(c, "weight", where);
      mc.mean = get_num(c, "mean", where);
      mc.var = get_num(c, "var", where);
      if (!(mc.weight > 0.0) || !(mc.var > 0.0))
        throw ConfigError(where + ": component weight/var must be positive");
      spec.components.push_back(mc);
    }
  } else if (type == "tabulated") {
    spec.type = MarginalSpec::Type::kTabulated;
    if (!j.contains("file") || !j["file"].is_string())
      throw ConfigError(where + ": tabulated needs 'file'");
    spec.file = j["file"].get<std::string>();
    std::ifstream in(spec.file);
    if (!in) throw ConfigError(where + ": file not found: " + spec.file);
  } else {
    throw ConfigError(where + ": type must be gaussian|mixture|tabulated");
  }
  return spec;
}

std::vector<double> parse_number_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected non-empty array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::pair<double, double>> read_two_column_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.find_first_not_of("-+.,0123456789eE \t") != std::string::npos) {
      first = false;  // header line
      continue;
    }
    first = false;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, y;
    if (ls >> x >> y) rows.emplace_back(x, y);
  }
  return rows;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  require_keys(j, "config",
               {"grid", "reference", "marginals", "solver", "experiment", "seed"});

  ExperimentConfig cfg;
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    require_keys(g, "grid", {"a", "b", "n"});
    cfg.a = get_num(g, "a", "grid");
    cfg.b = get_num(g, "b", "grid");
    if (!g.contains("n") || !g["n"].is_number_integer())
      throw ConfigError("grid: missing integer 'n'");
    cfg.n = g["n"].get<int>();
    if (!(cfg.a < cfg.b) || cfg.n < 3) throw ConfigError("grid: need a < b and n >= 3");
  }
  if (j.contains("reference")) {
    const auto& r = j["reference"];
    require_keys(r, "reference", {"backend", "kappa", "potential"});
    const std::string backend = r.value("backend", "ou_exact");
    if (backend == "ou_exact")
      cfg.backend = Backend::kOuExact;
    else if (backend == "spectral")
      cfg.backend = Backend::kSpectral;
    else
      throw ConfigError("reference: backend must be ou_exact|spectral");
    cfg.kappa = get_num(r, "kappa", "reference");
    if (r.contains("potential")) {
      const auto& p = r["potential"];
      require_keys(p, "reference.potential", {"type", "kappa", "file"});
      const std::string type = p.value("type", "ou");
      if (type == "ou") {
        cfg.potential_type = PotentialSpec::Type::kOu;
      } else if (type == "tabulated") {
        cfg.potential_type = PotentialSpec::Type::kTabulated;
        if (!p.contains("file") || !p["file"].is_string())
          throw ConfigError("reference.potential: tabulated needs 'file'");
        cfg.potential_file = p["file"].get<std::string>();
        std::ifstream in(cfg.potential_file);
        if (!in) throw ConfigError("reference.potential: file not found");
      } else {
        throw ConfigError("reference.potential: type must be ou|tabulated");
      }
    }
  }
  if (j.contains("marginals")) {
    const auto& m = j["marginals"];
    require_keys(m, "marginals", {"mu", "nu", "window"});
    if (m.contains("mu")) cfg.mu = parse_marginal(m["mu"], "marginals.mu");
    if (m.contains("nu")) cfg.nu = parse_marginal(m["nu"], "marginals.nu");
    if (m.contains("window")) {
      const auto& w = m["window"];
      require_keys(w, "marginals.window", {"flat", "cut"});
      Window win;
      win.flat = get_num(w, "flat", "marginals.window");
      win.cut = get_num(w, "cut", "marginals.window");
      if (!(win.flat < win.cut)) throw ConfigError("marginals.window: need flat < cut");
      cfg.window = win;
    }
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    require_keys(s, "solver", {"tol", "max_iter", "time_grid"});
    if (s.contains("tol")) cfg.solver.tol = get_num(s, "tol", "solver");
    if (s.contains("max_iter")) cfg.solver.max_iter = s["max_iter"].get<int>();
    if (s.contains("time_grid")) cfg.solver.time_grid = s["time_grid"].get<int>();
    if (!(cfg.solver.tol > 0.0) || cfg.solver.max_iter < 1 || cfg.solver.time_grid < 9)
      throw ConfigError("solver: tol > 0, max_iter >= 1, time_grid >= 9 required");
  }
  if (!j.contains("experiment")) throw ConfigError("config: missing 'experiment'");
  {
    const auto& e = j["experiment"];
    require_keys(e, "experiment",
                 {"type", "T", "Ts", "taylor_Ts", "n_test_functions", "suite",
                  "interaction", "steps", "damping", "tol", "steps_per_unit"});
    cfg.experiment = e.value("type", "");
    const std::set<std::string> kinds = {"solve",    "sweep",   "shorttime", "longtime",
                                         "duality",  "mfsp",    "check"};
    if (!kinds.count(cfg.experiment))
      throw ConfigError("experiment: unknown type '" + cfg.experiment + "'");
    if (e.contains("T")) cfg.T = get_num(e, "T", "experiment");
    if (e.contains("Ts")) cfg.Ts = parse_number_list(e["Ts"], "experiment.Ts");
    if (e.contains("taylor_Ts"))
      cfg.taylor_Ts = parse_number_list(e["taylor_Ts"], "experiment.taylor_Ts");
    if (e.contains("n_test_functions"))
      cfg.n_test_functions = e["n_test_functions"].get<int>();
    if (e.contains("suite")) cfg.suite = e["suite"].get<std::string>();
    if (e.contains("interaction")) {
      const auto& w = e["interaction"];
      require_keys(w, "experiment.interaction", {"type", "kappa", "eps"});
      const std::string type = w.value("type", "quadratic");
      const double kap = get_num(w, "kappa", "experiment.interaction");
      if (type == "quadratic")
        cfg.interaction = make_quadratic(kap);
      else if (type == "quadratic_quartic")
        cfg.interaction = make_quadratic_quartic(kap, get_num(w, "eps", "experiment.interaction"));
      else
        throw ConfigError("experiment.interaction: type must be quadratic|quadratic_quartic");
    }
    if (e.contains("steps")) cfg.mfsp.steps = e["steps"].get<int>();
    if (e.contains("damping")) cfg.mfsp.damping = get_num(e, "damping", "experiment");
    if (e.contains("tol")) cfg.mfsp.tol = get_num(e, "tol", "experiment");
    if (e.contains("steps_per_unit")) cfg.mf_steps_per_unit = e["steps_per_unit"].get<int>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw ConfigError("seed: expected an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  cfg.raw_json = j.dump(2);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ExperimentConfig default_check_config(const std::string& suite, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.experiment = "check";
  cfg.suite = suite;
  cfg.seed = seed;
  cfg.mu = MarginalSpec{MarginalSpec::Type::kGaussian, 1.0, 0.25, {}, ""};
  cfg.nu = MarginalSpec{MarginalSpec::Type::kGaussian, -1.0, 0.25, {}, ""};
  cfg.window = Window{3.5, 4.5};
  nlohmann::json j;
  j["experiment"] = {{"type", "check"}, {"suite", suite}};
  j["seed"] = seed;
  cfg.raw_json = j.dump(2);
  return cfg;
}

Grid config_grid(const ExperimentConfig& cfg) { return make_grid(cfg.a, cfg.b, cfg.n); }

ReferenceProcess config_reference(const ExperimentConfig& cfg, const Grid& grid) {
  PotentialSpec spec;
  if (cfg.potential_type == PotentialSpec::Type::kOu) {
    spec = ou_potential(cfg.kappa);
  } else {
    auto rows = read_two_column_csv(cfg.potential_file);
    if (static_cast<int>(rows.size()) != grid.n)
      throw ConfigError("tabulated potential: need one row per grid node");
    GridFunction u(grid.n);
    for (int i = 0; i < grid.n; ++i) {
      if (std::abs(rows[i].first - grid.points[i]) > 1e-9 * (1.0 + std::abs(grid.points[i])))
        throw ConfigError("tabulated potential: abscissae do not match the grid");
      u[i] = rows[i].second;
    }
    spec = tabulated_potential(cfg.kappa, std::move(u));
  }
  return build_reference(grid, cfg.kappa, spec, cfg.backend);
}

Marginal config_marginal(const ExperimentConfig& cfg, const MarginalSpec& spec,
                         const ReferenceProcess& ref) {
  switch (spec.type) {
    case MarginalSpec::Type::kGaussian:
      return gaussian_marginal(ref, spec.mean, spec.var, cfg.window);
    case MarginalSpec::Type::kMixture:
      return mixture_marginal(ref, spec.components, cfg.window);
    case MarginalSpec::Type::kTabulated: {
      auto rows = read_two_column_csv(spec.file);
      const Grid& grid = ref.grid();
      if (static_cast<int>(rows.size()) != grid.n)
        throw ConfigError("tabulated marginal: need one row per grid node");
      Marginal out;
      std::vector<double> leb(grid.n);
      for (int i = 0; i < grid.n; ++i) {
        if (std::abs(rows[i].first - grid.points[i]) >
            1e-9 * (1.0 + std::abs(grid.points[i])))
          throw ConfigError("tabulated marginal: abscissae do not match the grid");
        if (rows[i].second < 0.0) throw ConfigError("tabulated marginal: negative density");
        leb[i] = rows[i].second;
      }
      double mass = 0.0;
      std::vector<double> vals(grid.n);
      for (int i = 0; i < grid.n; ++i) {
        vals[i] = leb[i] * grid.quad[i] / ref.m()[i];
        mass += vals[i] * ref.m()[i];
      }
      if (!(mass > 0.0)) throw ConfigError("tabulated marginal: zero mass");
      for (double& v : vals) v /= mass;
      out.density.values = std::move(vals);
      GridFunction logs(grid.n, 0.0);
      for (int i = 0; i < grid.n; ++i)
        logs[i] = out.density.values[i] > 0.0 ? std::log(out.density.values[i]) : -745.0;
      out.dlog = grad(grid, logs);
      out.entropy = relative_entropy(out.density, ref.m());
      for (int i = 0; i < grid.n; ++i) {
        const double w = out.density.values[i] * ref.m()[i];
        out.mean += grid.points[i] * w;
        out.second_moment += grid.points[i] * grid.points[i] * w;
      }
      return out;
    }
  }
  throw ConfigError("marginal: unreachable");
}

}  // namespace bridgelab
