#include "stochak/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "stochak/errors.hpp"

namespace stochak {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Typed extraction that remembers which keys were read, so leftovers can be
// reported (with their line) as unknown.
class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  bool has(const std::string& key) const { return raw_.entries.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    auto it = raw_.entries.find(key);
    return it == raw_.entries.end() ? fallback : it->second.first;
  }

  std::string required(const std::string& key) {
    consumed_.insert(key);
    auto it = raw_.entries.find(key);
    if (it == raw_.entries.end())
      throw ConfigError(raw_.path + ": missing required key '" + key + "'");
    return it->second.first;
  }

  double num_required(const std::string& key) {
    const std::string v = required(key);
    try {
      size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (trim(v.substr(pos)).empty()) return x;
    } catch (...) {
    }
    throw ConfigError(raw_.path, raw_.entries.at(key).second,
                      "key '" + key + "': expected number");
  }

  double num(const std::string& key, double fallback) {
    return parse<double>(key, fallback, "number");
  }
  int integer(const std::string& key, int fallback) {
    return parse<int>(key, fallback, "integer");
  }
  uint64_t u64(const std::string& key, uint64_t fallback) {
    return parse<uint64_t>(key, fallback, "unsigned integer");
  }
  bool boolean(const std::string& key, bool fallback) {
    consumed_.insert(key);
    auto it = raw_.entries.find(key);
    if (it == raw_.entries.end()) return fallback;
    const std::string& v = it->second.first;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(raw_.path, it->second.second, "key '" + key + "': expected bool");
  }

  std::vector<double> num_list(const std::string& key, std::vector<double> fallback) {
    consumed_.insert(key);
    auto it = raw_.entries.find(key);
    if (it == raw_.entries.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second.first);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(std::stod(trim(tok)));
      } catch (...) {
        throw ConfigError(raw_.path, it->second.second,
                          "key '" + key + "': expected a comma list of numbers");
      }
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, val] : raw_.entries)
      if (!consumed_.count(key))
        throw ConfigError(raw_.path, val.second, "unknown key '" + key + "'");
  }

 private:
  template <typename T>
  T parse(const std::string& key, T fallback, const char* what) {
    consumed_.insert(key);
    auto it = raw_.entries.find(key);
    if (it == raw_.entries.end()) return fallback;
    std::stringstream ss(it->second.first);
    T v{};
    ss >> v;
    if (ss.fail() || !trim(std::string(std::istreambuf_iterator<char>(ss), {})).empty())
      throw ConfigError(raw_.path, it->second.second,
                        "key '" + key + "': expected " + what);
    return v;
  }

  const RawConfig& raw_;
  std::set<std::string> consumed_;
};

}  // namespace

void RawConfig::set(const std::string& dotted_key, const std::string& value, int line) {
  entries[dotted_key] = {value, line};
}

RawConfig parse_config_text(const std::string& text, const std::string& path) {
  RawConfig raw;
  raw.path = path;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path, line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(path, line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(path, line_no, "empty key");
    if (section.empty())
      throw ConfigError(path, line_no, "key outside of any [section]");
    raw.set(section + "." + key, value, line_no);
  }
  return raw;
}

RawConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

RunConfig make_run_config(const RawConfig& raw) {
  Reader r(raw);
  RunConfig cfg;

  cfg.n_points = r.integer("grid.n_points", 128);

  cfg.field_A = r.required("fields.A");
  cfg.field_N = r.str("fields.N", cfg.field_N);
  cfg.field_f = r.str("fields.f", cfg.field_f);
  cfg.field_K0 = r.str("fields.K0", cfg.field_K0);

  cfg.params.rho = r.num_required("model.rho");
  cfg.params.sigma = r.num_required("model.sigma");
  cfg.params.alpha0 = r.num_required("model.alpha0");
  try {
    cfg.params.alpha_rest = AlphaRestSpec::parse(r.str("model.alpha_rest", "uniform"));
    cfg.params.validate();
  } catch (const std::exception& e) {
    throw ConfigError(raw.path + ": " + e.what());
  }

  cfg.sim.T = r.num("simulate.T", 80.0);
  cfg.sim.dt = r.num("simulate.dt", 0.01);
  cfg.sim.n_modes = r.integer("simulate.n_modes", 16);
  cfg.sim.n_paths = r.integer("simulate.n_paths", 10000);
  cfg.sim.seed = r.u64("simulate.seed", 20240901);
  try {
    cfg.sim.scheme = parse_scheme(r.str("simulate.scheme", "exact_mode"));
  } catch (const std::exception& e) {
    throw ConfigError(raw.path + ": " + e.what());
  }
  cfg.record_stride = r.integer("simulate.record_stride", 0);
  cfg.dump_paths = r.boolean("simulate.dump_paths", false);

  cfg.verify.T = r.num("verify.T", 80.0);
  cfg.verify.dt = r.num("verify.dt", 0.01);
  cfg.verify.n_paths = r.integer("verify.n_paths", 10000);
  cfg.verify.em_paths = r.integer("verify.em_paths", 10000);
  cfg.verify.seed = r.u64("verify.seed", cfg.sim.seed);
  cfg.verify.k_sigma = r.num("verify.k_sigma", 3.0);
  cfg.verify.hjb_states = r.integer("verify.hjb_states", 10);
  cfg.verify.lipschitz_trials = r.integer("verify.lipschitz_trials", 64);
  cfg.verify.hs_T = r.num("verify.hs_T", 5.0);

  {
    const auto modes = r.num_list("asymptotics.modes", {0, 1});
    cfg.asym.modes.clear();
    for (double m : modes) cfg.asym.modes.push_back(static_cast<int>(m));
  }
  cfg.asym.detrended.T = r.num("asymptotics.T", 80.0);
  cfg.asym.detrended.dt = r.num("asymptotics.dt", 0.01);
  cfg.asym.detrended.n_paths = r.integer("asymptotics.n_paths", 2000);
  cfg.asym.detrended.n_samples = r.integer("asymptotics.n_samples", 2000);
  cfg.asym.detrended.seed = r.u64("asymptotics.seed", cfg.sim.seed);
  cfg.asym.detrended.inner_dt = r.num("asymptotics.inner_dt", 0.01);
  cfg.asym.detrended.tail_tol = r.num("asymptotics.tail_tol", 1e-6);
  cfg.asym.detrended.ks_level = r.num("asymptotics.ks_level", 0.05);
  cfg.asym.epsilon_rel = r.num("asymptotics.epsilon_rel", 0.01);
  cfg.asym.extinction_T = r.num("asymptotics.extinction_T", 100.0);
  cfg.asym.extinction_dt = r.num("asymptotics.extinction_dt", 0.01);
  cfg.asym.extinction_paths = r.integer("asymptotics.extinction_paths", 10000);
  cfg.asym.curve_points = r.integer("asymptotics.curve_points", 20);
  cfg.asym.tail_mu = r.num("asymptotics.tail_mu", 0.5);
  cfg.asym.tail_s1 = r.num("asymptotics.tail_s1", 0.2);
  cfg.asym.tail_s2 = r.num("asymptotics.tail_s2", 0.2);
  cfg.asym.tail_x = r.num_list("asymptotics.tail_x", {1.5, 2.0, 3.0});
  cfg.asym.tail_paths = r.integer("asymptotics.tail_paths", 100000);
  cfg.asym.tail_T = r.num("asymptotics.tail_T", 200.0);
  cfg.asym.tail_dt = r.num("asymptotics.tail_dt", 0.05);

  cfg.out_dir = r.str("output.dir", "out");
  cfg.report_format = r.str("output.format", "csv");
  if (cfg.report_format != "csv")
    throw ConfigError(raw.path + ": output.format: only 'csv' is supported");

  r.finish();
  return cfg;
}

ModelFields build_fields(const RunConfig& cfg, const GridPtr& grid) {
  return ModelFields{
      parse_field_recipe(grid, cfg.field_A),
      parse_field_recipe(grid, cfg.field_N),
      parse_field_recipe(grid, cfg.field_f),
      parse_field_recipe(grid, cfg.field_K0),
  };
}

Model build_model(const RunConfig& cfg) {
  const GridPtr grid = make_grid(cfg.n_points);
  return make_model(build_fields(cfg, grid), cfg.params, cfg.sim.n_modes);
}

}  // namespace stochak
