#include "stochak/cli_app.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iomanip>
#include <iostream>

#include "stochak/config.hpp"
#include "stochak/csv.hpp"
#include "stochak/errors.hpp"
#include "stochak/util.hpp"

namespace stochak {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitAssumptionFailure = 3;

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  std::vector<std::string> overrides;
};

RunConfig load_run_config(const GlobalOpts& g) {
  RawConfig raw = load_config_file(g.config_path);
  for (const std::string& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    raw.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  RunConfig cfg = make_run_config(raw);
  if (g.seed_set) {
    cfg.sim.seed = g.seed;
    cfg.verify.seed = g.seed;
    cfg.asym.detrended.seed = g.seed;
  }
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void print_report(const VerificationReport& rep) {
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "[pass] " : "[FAIL] ") << std::left << std::setw(32)
              << c.name << " measured=" << csv_num(c.measured);
    if (c.stochastic()) std::cout << " se=" << csv_num(c.se);
    std::cout << " oracle=" << csv_num(c.oracle) << " tol=" << csv_num(c.tol);
    if (!c.note.empty()) std::cout << "  (" << c.note << ")";
    std::cout << "\n";
  }
}

void write_report_csv(const VerificationReport& rep, const std::string& path) {
  CsvWriter w(path);
  w.row({"check", "measured", "oracle", "tol", "se", "pass"});
  for (const auto& c : rep.checks)
    w.row({c.name, csv_num(c.measured), csv_num(c.oracle), csv_num(c.tol),
           csv_num(c.se), c.pass ? "1" : "0"});
}

int cmd_validate(const RunConfig& cfg) {
  const GridPtr grid = make_grid(cfg.n_points);
  const ModelFields fields = build_fields(cfg, grid);
  const EigenSystem es = build_eigensystem(fields.A, cfg.sim.n_modes);
  const VerificationReport rep = check_assumptions(cfg.params, fields, es);
  print_report(rep);
  write_report_csv(rep, out_path(cfg, "assumptions.csv"));
  for (const char* required : {"discount", "fields", "perron"}) {
    const CheckResult* c = rep.find(required);
    if (!c || !c->pass) return kExitAssumptionFailure;
  }
  return kExitOk;
}

int cmd_eig(const RunConfig& cfg) {
  const GridPtr grid = make_grid(cfg.n_points);
  const ModelFields fields = build_fields(cfg, grid);
  const EigenSystem es = build_eigensystem(fields.A, cfg.sim.n_modes);
  std::cout << "n lambda_n\n";
  for (int n = 0; n < es.size(); ++n)
    std::cout << n << " " << csv_num(es.lambdas[static_cast<size_t>(n)]) << "\n";
  CsvWriter w(out_path(cfg, "eigenfields.csv"));
  std::vector<std::string> header{"x"};
  for (int n = 0; n < es.size(); ++n) header.push_back("e_" + std::to_string(n));
  w.row(header);
  for (int i = 0; i < grid->n(); ++i) {
    std::vector<std::string> row{csv_num(grid->x()[static_cast<size_t>(i)])};
    for (int n = 0; n < es.size(); ++n)
      row.push_back(csv_num(es.modes[static_cast<size_t>(n)][i]));
    w.row(row);
  }
  return kExitOk;
}

int cmd_gamma(const RunConfig& cfg) {
  const Model m = build_model(cfg);
  const ExtReal w0 = value_function_x0(m.x0_init(), m.pc, m.params);
  std::cout << "gamma = " << csv_num(m.pc.gamma) << "\n"
            << "g = " << csv_num(m.pc.g) << "\n"
            << "g_tilde = " << csv_num(m.pc.g_tilde) << "\n"
            << "w(K0) = " << (w0.is_neg_inf() ? "-inf" : csv_num(w0.value())) << "\n";
  CsvWriter w(out_path(cfg, "policy.csv"));
  w.row({"n", "lambda_n", "c_n"});
  for (int n = 0; n < m.es.size(); ++n)
    w.row({std::to_string(n), csv_num(m.es.lambdas[static_cast<size_t>(n)]),
           csv_num(m.pc.c_n[static_cast<size_t>(n)])});
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
  const Model m = build_model(cfg);
  int stride = cfg.record_stride;
  if (stride <= 0)
    stride = std::max<int>(1, static_cast<int>(cfg.sim.n_steps() / 100));
  const Ensemble ens = simulate_closed_loop(m, cfg.sim, stride);

  CsvWriter w(out_path(cfg, "simulate_stats.csv"));
  std::vector<std::string> header{"t"};
  for (int n = 0; n < ens.n_modes; ++n) {
    header.push_back("mean_K" + std::to_string(n));
    header.push_back("std_K" + std::to_string(n));
  }
  w.row(header);
  for (int s = 0; s < ens.n_stamps(); ++s) {
    std::vector<std::string> row{csv_num(ens.times[static_cast<size_t>(s)])};
    for (int n = 0; n < ens.n_modes; ++n) {
      double sum = 0.0, sum2 = 0.0;
      for (int p = 0; p < ens.n_paths; ++p) {
        const double v = ens.value(p, s, n);
        sum += v;
        sum2 += v * v;
      }
      const double mean = sum / ens.n_paths;
      const double var = std::max(0.0, sum2 / ens.n_paths - mean * mean);
      row.push_back(csv_num(mean));
      row.push_back(csv_num(std::sqrt(var)));
    }
    w.row(row);
  }

  int exploded = 0, inadmissible = 0;
  for (const auto& f : ens.flags) {
    exploded += f.exploded ? 1 : 0;
    inadmissible += f.inadmissible ? 1 : 0;
  }
  std::cout << "paths " << ens.n_paths << ", stamps " << ens.n_stamps()
            << ", exploded " << exploded << ", inadmissible " << inadmissible << "\n";

  if (cfg.dump_paths) {
    if (ens.n_paths > 200)
      throw ConfigError("dump_paths: refusing to dump more than 200 paths");
    CsvWriter pw(out_path(cfg, "paths.csv"));
    std::vector<std::string> ph{"path", "t"};
    for (int n = 0; n < ens.n_modes; ++n) ph.push_back("K" + std::to_string(n));
    ph.push_back("beta0");
    pw.row(ph);
    for (int p = 0; p < ens.n_paths; ++p)
      for (int s = 0; s < ens.n_stamps(); ++s) {
        std::vector<std::string> row{std::to_string(p),
                                     csv_num(ens.times[static_cast<size_t>(s)])};
        for (int n = 0; n < ens.n_modes; ++n) row.push_back(csv_num(ens.value(p, s, n)));
        row.push_back(csv_num(ens.beta0_at(p, s)));
        pw.row(row);
      }
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  const Model m = build_model(cfg);
  const VerificationReport rep = run_verification_suite(m, cfg.verify);
  print_report(rep);
  write_report_csv(rep, out_path(cfg, "verify_report.csv"));
  return rep.all_pass() ? kExitOk : kExitCheckFailure;
}

int cmd_asymptotics(const RunConfig& cfg, const std::string& mode) {
  const Model m = build_model(cfg);
  if (mode == "detrended") {
    const VerificationReport rep =
        detrended_convergence_check(m, cfg.asym.modes, cfg.asym.detrended);
    print_report(rep);
    CsvWriter w(out_path(cfg, "detrended_ks.csv"));
    w.row({"check", "statistic", "critical", "pass"});
    for (const auto& c : rep.checks)
      w.row({c.name, csv_num(c.measured), csv_num(c.tol), c.pass ? "1" : "0"});
    return rep.all_pass() ? kExitOk : kExitCheckFailure;
  }
  if (mode == "extinction") {
    double norm0 = 0.0;
    for (double v : m.k0) norm0 += v * v;
    const double eps = cfg.asym.epsilon_rel * std::sqrt(norm0);
    SimConfig sc = cfg.sim;
    sc.T = cfg.asym.extinction_T;
    sc.dt = cfg.asym.extinction_dt;
    sc.n_paths = cfg.asym.extinction_paths;
    const ExtinctionCurve curve =
        extinction_curve(m, eps, sc, cfg.asym.curve_points);
    CsvWriter w(out_path(cfg, "extinction_curve.csv"));
    w.row({"t", "p_hat", "se", "proxy"});
    bool dominated = true;
    for (size_t i = 0; i < curve.t.size(); ++i) {
      w.row({csv_num(curve.t[i]), csv_num(curve.p_hat[i]), csv_num(curve.se[i]),
             csv_num(curve.proxy[i])});
      if (curve.p_hat[i] > curve.proxy[i] + 3.0 * curve.se[i]) dominated = false;
    }
    std::cout << curve.note << "\n";
    std::cout << "final P(|K| > eps) = " << curve.p_hat.back() << " at t = "
              << curve.t.back() << " (eps = " << eps << ")\n";
    std::cout << (dominated ? "[pass] " : "[FAIL] ")
              << "empirical curve within 3 SE of the principal-mode proxy\n";
    return dominated ? kExitOk : kExitCheckFailure;
  }
  if (mode == "tailbound") {
    const VerificationReport rep = sup_exp_tail_check(
        cfg.asym.tail_mu, cfg.asym.tail_s1, cfg.asym.tail_s2, cfg.asym.tail_x,
        cfg.asym.tail_paths, cfg.asym.tail_T, cfg.asym.tail_dt,
        cfg.asym.detrended.seed);
    print_report(rep);
    write_report_csv(rep, out_path(cfg, "tailbound.csv"));
    return rep.all_pass() ? kExitOk : kExitCheckFailure;
  }
  throw ConfigError("unknown asymptotics mode '" + mode + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"spectral simulator and verifier for spatial stochastic growth"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "path to the run configuration")
      ->required();
  app.add_option("--out", g.out_dir, "output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed override");
  app.add_option("--threads", g.threads, "worker cap for path simulation")
      ->check(CLI::PositiveNumber);
  app.add_option("--set", g.overrides, "section.key=value config override");

  app.add_subcommand("validate", "check the standing assumptions");
  app.add_subcommand("eig", "eigenvalue table and eigenfield CSV");
  app.add_subcommand("gamma", "closed-form policy constants");
  app.add_subcommand("simulate", "closed-loop ensemble statistics");
  app.add_subcommand("verify", "optimality and well-posedness battery");
  auto* asym = app.add_subcommand("asymptotics", "long-run behavior checks");
  std::string asym_mode = "detrended";
  asym->add_option("--mode", asym_mode, "detrended | extinction | tailbound");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    g.seed_set = seed_opt->count() > 0;
    set_max_threads(g.threads);
    const RunConfig cfg = load_run_config(g);
    if (app.got_subcommand("validate")) return cmd_validate(cfg);
    if (app.got_subcommand("eig")) return cmd_eig(cfg);
    if (app.got_subcommand("gamma")) return cmd_gamma(cfg);
    if (app.got_subcommand("simulate")) return cmd_simulate(cfg);
    if (app.got_subcommand("verify")) return cmd_verify(cfg);
    if (app.got_subcommand("asymptotics")) return cmd_asymptotics(cfg, asym_mode);
    return kExitConfigError;
  } catch (const AssumptionError& e) {
    std::cerr << "assumption failure: " << e.what() << "\n";
    return kExitAssumptionFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace stochak
