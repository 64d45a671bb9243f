#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace stochak {

// One verification check: measured value vs oracle at a tolerance, with a
// standard error when the measurement is stochastic.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double oracle = 0.0;
  double tol = 0.0;
  double se = std::nan("");  // NaN when deterministic
  bool pass = false;
  std::string note;

  bool stochastic() const { return !std::isnan(se); }

  static CheckResult against(std::string name, double measured, double oracle,
                             double tol, std::string note = "") {
    CheckResult r;
    r.name = std::move(name);
    r.measured = measured;
    r.oracle = oracle;
    r.tol = tol;
    r.pass = std::isfinite(measured) && std::abs(measured - oracle) <= tol;
    r.note = std::move(note);
    return r;
  }

  static CheckResult stochastic_against(std::string name, double measured,
                                        double oracle, double se, double k_sigma,
                                        std::string note = "") {
    CheckResult r;
    r.name = std::move(name);
    r.measured = measured;
    r.oracle = oracle;
    r.se = se;
    r.tol = k_sigma * se;
    r.pass = std::isfinite(measured) && std::abs(measured - oracle) <= k_sigma * se;
    r.note = std::move(note);
    return r;
  }

  static CheckResult flag(std::string name, bool pass, std::string note = "") {
    CheckResult r;
    r.name = std::move(name);
    r.measured = pass ? 1.0 : 0.0;
    r.oracle = 1.0;
    r.pass = pass;
    r.note = std::move(note);
    return r;
  }
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  void add(CheckResult c) { checks.push_back(std::move(c)); }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

}  // namespace stochak
