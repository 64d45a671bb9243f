#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stochak/cli_app.hpp"
#include "stochak/config.hpp"
#include "stochak/errors.hpp"

using namespace stochak;
namespace fs = std::filesystem;

namespace {

const char* kBenchmarkConfig = R"(# constant-coefficient benchmark
[grid]
n_points = 128

[fields]
A = const:0.05
N = const:1
f = const:1
K0 = const:1

[model]
rho = 0.1
sigma = 0.5
alpha0 = 0.2
alpha_rest = uniform

[simulate]
T = 2
dt = 0.01
n_modes = 6
n_paths = 50
seed = 31415
scheme = exact_mode
)";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("stochak_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int counter() {
    static int c = 0;
    return c++;
  }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const RawConfig raw = parse_config_text(kBenchmarkConfig, "mem");
  const RunConfig cfg = make_run_config(raw);
  CHECK(cfg.n_points == 128);
  CHECK(cfg.params.rho == doctest::Approx(0.1));
  CHECK(cfg.sim.seed == 31415);
  CHECK(cfg.sim.n_paths == 50);
  CHECK(cfg.field_A == "const:0.05");

  SUBCASE("line-anchored errors") {
    CHECK_THROWS_WITH_AS(
        (void)make_run_config(parse_config_text("[grid]\nn_points = twelve\n", "m")),
        doctest::Contains("m:2"), ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)make_run_config(parse_config_text("[grid]\nwhat = 1\n", "m")),
        doctest::Contains("unknown key"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("key = 1\n", "m"), ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("[grid\nn_points = 8\n", "m"),
                    ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)make_run_config(parse_config_text("[fields]\nA = const:1\n", "m")),
        doctest::Contains("model.rho"), ConfigError);
  }
  SUBCASE("defaults are filled in") {
    CHECK(cfg.field_N == "const:1");
    CHECK(cfg.verify.n_paths == 10000);
    CHECK(cfg.asym.tail_x.size() == 3);
    CHECK(cfg.out_dir == "out");
  }
}

TEST_CASE("validate command and exit codes") {
  TempDir tmp;
  const std::string cfg = tmp.file("b1.cfg", kBenchmarkConfig);
  const std::string out = (tmp.path / "out").string();

  CHECK(run_cli({"--config", cfg, "--out", out, "validate"}) == 0);
  CHECK(fs::exists(fs::path(out) / "assumptions.csv"));

  // a discount rate violating the finiteness inequality
  CHECK(run_cli({"--config", cfg, "--out", out, "--set", "model.rho=0.01",
                 "--set", "model.alpha0=0", "validate"}) == 3);
  // gamma needs the assumptions too
  CHECK(run_cli({"--config", cfg, "--out", out, "--set", "model.rho=0.01",
                 "--set", "model.alpha0=0", "gamma"}) == 3);

  // usage / config errors
  CHECK(run_cli({"--config", cfg, "bogus_command"}) == 2);
  CHECK(run_cli({"--config", (tmp.path / "missing.cfg").string(), "validate"}) == 2);
  const std::string bad = tmp.file("bad.cfg", "[grid]\nmystery = 1\n");
  CHECK(run_cli({"--config", bad, "validate"}) == 2);
}

TEST_CASE("eig and gamma artifacts") {
  TempDir tmp;
  const std::string cfg = tmp.file("b1.cfg", kBenchmarkConfig);
  const std::string out = (tmp.path / "out").string();

  CHECK(run_cli({"--config", cfg, "--out", out, "eig"}) == 0);
  const std::string eig_csv = slurp(fs::path(out) / "eigenfields.csv");
  CHECK(eig_csv.find("x,e_0,e_1") == 0);

  CHECK(run_cli({"--config", cfg, "--out", out, "gamma"}) == 0);
  const std::string pol = slurp(fs::path(out) / "policy.csv");
  CHECK(pol.find("n,lambda_n,c_n") == 0);
}

TEST_CASE("simulate is byte reproducible") {
  TempDir tmp;
  const std::string cfg = tmp.file("b1.cfg", kBenchmarkConfig);
  const std::string out1 = (tmp.path / "o1").string();
  const std::string out2 = (tmp.path / "o2").string();

  CHECK(run_cli({"--config", cfg, "--out", out1, "simulate"}) == 0);
  CHECK(run_cli({"--config", cfg, "--out", out2, "--threads", "3", "simulate"}) == 0);
  CHECK(slurp(fs::path(out1) / "simulate_stats.csv") ==
        slurp(fs::path(out2) / "simulate_stats.csv"));

  // a different seed changes the bytes
  const std::string out3 = (tmp.path / "o3").string();
  CHECK(run_cli({"--config", cfg, "--out", out3, "--seed", "7", "simulate"}) == 0);
  CHECK(slurp(fs::path(out1) / "simulate_stats.csv") !=
        slurp(fs::path(out3) / "simulate_stats.csv"));
}

TEST_CASE("per-path dumps") {
  TempDir tmp;
  const std::string cfg = tmp.file("b1.cfg", kBenchmarkConfig);
  const std::string out = (tmp.path / "out").string();
  CHECK(run_cli({"--config", cfg, "--out", out, "--set", "simulate.n_paths=3",
                 "--set", "simulate.dump_paths=true", "simulate"}) == 0);
  const std::string paths = slurp(fs::path(out) / "paths.csv");
  CHECK(paths.find("path,t,K0") == 0);
  CHECK(paths.find("-nan") == std::string::npos);
  CHECK(paths.find("nan") == std::string::npos);
}

TEST_CASE("asymptotics tailbound command") {
  TempDir tmp;
  const std::string cfg = tmp.file("b1.cfg", kBenchmarkConfig);
  const std::string out = (tmp.path / "out").string();
  CHECK(run_cli({"--config", cfg, "--out", out, "--set",
                 "asymptotics.tail_paths=5000", "--set", "asymptotics.tail_T=50",
                 "asymptotics", "--mode", "tailbound"}) == 0);
  CHECK(fs::exists(fs::path(out) / "tailbound.csv"));
}

TEST_CASE("asymptotics extinction command") {
  TempDir tmp;
  const std::string cfg = tmp.file("b1.cfg", kBenchmarkConfig);
  const std::string out = (tmp.path / "out").string();
  CHECK(run_cli({"--config", cfg, "--out", out, "--set",
                 "asymptotics.extinction_paths=500", "--set",
                 "asymptotics.extinction_T=30", "--set",
                 "asymptotics.extinction_dt=0.05", "asymptotics", "--mode",
                 "extinction"}) == 0);
  const std::string curve = slurp(fs::path(out) / "extinction_curve.csv");
  CHECK(curve.find("t,p_hat,se,proxy") == 0);
}
