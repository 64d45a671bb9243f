#pragma once

#include <map>
#include <string>
#include <vector>

#include "stochak/asymptotics.hpp"
#include "stochak/model.hpp"
#include "stochak/simulate.hpp"
#include "stochak/verify.hpp"

namespace stochak {

struct AsymConfig {
  std::vector<int> modes{0, 1};
  DetrendedCheckConfig detrended;
  double epsilon_rel = 0.01;  // extinction threshold relative to |K0|
  double extinction_T = 100.0;
  double extinction_dt = 0.01;
  int extinction_paths = 10000;
  int curve_points = 20;
  double tail_mu = 0.5;
  double tail_s1 = 0.2;
  double tail_s2 = 0.2;
  std::vector<double> tail_x{1.5, 2.0, 3.0};
  int tail_paths = 100000;
  double tail_T = 200.0;
  double tail_dt = 0.05;
};

// Parsed and validated configuration of a whole run. Flat sectioned
// key = value text; every key has a documented default except the model
// parameters and the technology field.
struct RunConfig {
  int n_points = 128;
  std::string field_A;
  std::string field_N = "const:1";
  std::string field_f = "const:1";
  std::string field_K0 = "const:1";
  ModelParams params;
  SimConfig sim;
  int record_stride = 0;  // 0: choose automatically (about 100 stamps)
  bool dump_paths = false;
  VerifyConfig verify;
  AsymConfig asym;
  std::string out_dir = "out";
  std::string report_format = "csv";
};

// Raw key/value view with line anchors, before typed validation.
struct RawConfig {
  std::map<std::string, std::pair<std::string, int>> entries;  // section.key
  std::string path;

  void set(const std::string& dotted_key, const std::string& value, int line = 0);
};

RawConfig parse_config_text(const std::string& text, const std::string& path);
RawConfig load_config_file(const std::string& path);

// Validates types and key names (unknown keys are errors, anchored to their
// line).
RunConfig make_run_config(const RawConfig& raw);

ModelFields build_fields(const RunConfig& cfg, const GridPtr& grid);
Model build_model(const RunConfig& cfg);

}  // namespace stochak
