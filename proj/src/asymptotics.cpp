#include "stochak/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stochak/rng.hpp"
#include "stochak/util.hpp"

namespace stochak {

LimitLawSampler LimitLawSampler::build(const Model& m, int mode, double inner_dt,
                                       double tail_tol) {
  if (mode < 1 || mode >= m.es.size())
    throw std::invalid_argument("limit law: mode must be >= 1 and resolved");
  LimitLawSampler s;
  s.mode = mode;
  s.lambda_n = m.es.lambdas[static_cast<size_t>(mode)];
  s.g = m.pc.g;
  s.alpha0 = m.params.alpha0;
  s.c_n = m.pc.c_n[static_cast<size_t>(mode)];
  s.x0_init = m.x0_init();
  s.inner_dt = inner_dt;

  const double drift = s.lambda_n - s.g - 0.5 * s.alpha0 * s.alpha0;
  if (!(drift < 0.0))
    throw std::invalid_argument("limit law: nonnegative drift, kernel not integrable");
  if (s.c_n == 0.0 || s.x0_init == 0.0) {
    s.R = 0.0;  // degenerate point mass at 0
    return s;
  }
  // Expected tail of the truncated integral decays at rate drift + alpha0^2.
  const double mean_rate = drift + s.alpha0 * s.alpha0;
  if (!(mean_rate < 0.0))
    throw std::invalid_argument("limit law: mean of the kernel does not decay");
  const double scale = std::abs(s.c_n * s.x0_init);
  double r = std::log(tail_tol * std::abs(mean_rate) / scale) / mean_rate;
  r = std::max(r, 1.0);
  // align to the inner grid
  s.R = std::ceil(r / inner_dt) * inner_dt;
  s.tail_estimate = scale * std::exp(mean_rate * s.R) / std::abs(mean_rate);
  return s;
}

EmpiricalDistribution EmpiricalDistribution::from(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("empirical distribution: empty sample");
  for (double x : v)
    if (!std::isfinite(x))
      throw std::invalid_argument("empirical distribution: non-finite sample");
  std::sort(v.begin(), v.end());
  EmpiricalDistribution d;
  d.values = std::move(v);
  return d;
}

EmpiricalDistribution sample_limit_law(const LimitLawSampler& s, int n_samples,
                                       uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("limit law: need n_samples >= 1");
  std::vector<double> out(static_cast<size_t>(n_samples), 0.0);
  if (s.R == 0.0) return EmpiricalDistribution::from(std::move(out));

  const int64_t n_steps = std::llround(s.R / s.inner_dt);
  const double drift = s.lambda_n - s.g - 0.5 * s.alpha0 * s.alpha0;
  const double sq = std::sqrt(s.inner_dt);
  const NormalStream rng(seed);

  parallel_blocks(n_samples, [&](int64_t b, int64_t e) {
    for (int64_t i = b; i < e; ++i) {
      double b0 = 0.0, bn = 0.0;
      double integral = 0.5;  // integrand at r = 0 is 1 (trapezoid endpoint)
      for (int64_t k = 1; k <= n_steps; ++k) {
        b0 += sq * rng.normal(static_cast<uint64_t>(i), 0, static_cast<uint64_t>(k - 1));
        bn += sq * rng.normal(static_cast<uint64_t>(i), 1, static_cast<uint64_t>(k - 1));
        const double r = static_cast<double>(k) * s.inner_dt;
        const double v = std::exp(drift * r - s.alpha0 * b0 + s.alpha0 * bn);
        integral += (k == n_steps) ? 0.5 * v : v;
      }
      out[static_cast<size_t>(i)] = -s.c_n * s.x0_init * integral * s.inner_dt;
    }
  });
  return EmpiricalDistribution::from(std::move(out));
}

KsResult ks_two_sample(const EmpiricalDistribution& a,
                       const EmpiricalDistribution& b, double level) {
  const auto& xa = a.values;
  const auto& xb = b.values;
  if (xa.empty() || xb.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < xa.size() && ib < xb.size()) {
    const double x = std::min(xa[ia], xb[ib]);
    while (ia < xa.size() && xa[ia] <= x) ++ia;
    while (ib < xb.size() && xb[ib] <= x) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na -
                             static_cast<double>(ib) / nb));
  }
  KsResult r;
  r.statistic = d;
  double coeff = 1.358;  // 5%
  if (std::abs(level - 0.05) > 1e-12) {
    // c(alpha) = sqrt(-ln(alpha/2)/2)
    coeff = std::sqrt(-0.5 * std::log(level / 2.0));
  }
  r.critical = coeff * std::sqrt((na + nb) / (na * nb));
  r.pass = r.statistic <= r.critical;
  return r;
}

VerificationReport detrended_convergence_check(const Model& m,
                                               const std::vector<int>& modes,
                                               const DetrendedCheckConfig& cfg) {
  VerificationReport rep;
  const VerificationReport assumptions = check_assumptions(m.params, m.fields, m.es);
  const CheckResult* ready = assumptions.find("asymptotics_ready");
  if (!ready || !ready->pass) {
    rep.add(CheckResult::flag("asymptotics_ready", false,
                              ready ? ready->note : "assumption check missing"));
    return rep;
  }
  rep.add(CheckResult::flag("asymptotics_ready", true, ready->note));

  int max_mode = 0;
  for (int n : modes) max_mode = std::max(max_mode, n);
  SimConfig sc;
  sc.T = cfg.T;
  sc.dt = cfg.dt;
  sc.n_modes = std::min(m.es.size(), max_mode + 1);
  sc.n_paths = cfg.n_paths;
  sc.seed = cfg.seed;
  sc.scheme = Scheme::exact_mode;
  const Ensemble raw =
      simulate_closed_loop(m, sc, static_cast<int>(sc.n_steps()));
  const Ensemble det = detrend(raw, m.pc, m.params);
  const int last = det.n_stamps() - 1;

  for (int n : modes) {
    if (n == 0) {
      double worst = 0.0;
      for (int p = 0; p < det.n_paths; ++p)
        worst = std::max(worst, std::abs(det.value(p, last, 0) - m.x0_init()));
      rep.add(CheckResult::against("detrended_mode0_constant", worst, 0.0,
                                   1e-10 * std::max(1.0, m.x0_init())));
      continue;
    }
    const LimitLawSampler sampler =
        LimitLawSampler::build(m, n, cfg.inner_dt, cfg.tail_tol);
    if (sampler.c_n == 0.0 || sampler.x0_init == 0.0) {
      // point mass at zero: nearly all detrended mass must sit near 0
      int close = 0;
      for (int p = 0; p < det.n_paths; ++p)
        if (std::abs(det.value(p, last, n)) < 1e-3) ++close;
      const double frac = static_cast<double>(close) / det.n_paths;
      CheckResult c = CheckResult::flag("detrended_mode" + std::to_string(n) + "_null",
                                        frac >= 0.99);
      std::ostringstream os;
      os << "P(|K| < 1e-3) = " << frac;
      c.note = os.str();
      rep.add(c);
      continue;
    }
    std::vector<double> sim(static_cast<size_t>(det.n_paths));
    for (int p = 0; p < det.n_paths; ++p)
      sim[static_cast<size_t>(p)] = det.value(p, last, n);
    const EmpiricalDistribution sim_dist = EmpiricalDistribution::from(std::move(sim));
    const EmpiricalDistribution law =
        sample_limit_law(sampler, cfg.n_samples, cfg.seed + 1000 + static_cast<uint64_t>(n));
    const KsResult ks = ks_two_sample(sim_dist, law, cfg.ks_level);
    CheckResult c = CheckResult::against("detrended_mode" + std::to_string(n) + "_ks",
                                         ks.statistic, 0.0, ks.critical);
    std::ostringstream os;
    os << "KS " << ks.statistic << " vs critical " << ks.critical
       << " (R = " << sampler.R << ", tail <= " << sampler.tail_estimate << ")";
    c.note = os.str();
    rep.add(c);
  }
  return rep;
}

ExtinctionCurve extinction_curve(const Model& m, double epsilon,
                                 const SimConfig& cfg, int n_curve_points) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("extinction: epsilon must be > 0");
  ExtinctionCurve curve;
  curve.extinction_predicted = m.pc.g < 0.0;
  curve.note = curve.extinction_predicted
                   ? "raw optimal path tested (g < 0)"
                   : "no extinction predicted (g >= 0); curve reported anyway";

  const int stride = std::max<int>(
      1, static_cast<int>(cfg.n_steps() / std::max(1, n_curve_points)));
  const Ensemble ens = simulate_closed_loop(m, cfg, stride);
  const double x0 = m.x0_init();
  const double a0 = m.params.alpha0;
  for (int s = 0; s < ens.n_stamps(); ++s) {
    const double t = ens.times[static_cast<size_t>(s)];
    int count = 0;
    for (int p = 0; p < ens.n_paths; ++p) {
      double n2 = 0.0;
      for (int mo = 0; mo < ens.n_modes; ++mo) {
        const double v = ens.value(p, s, mo);
        n2 += v * v;
      }
      if (std::sqrt(n2) > epsilon) ++count;
    }
    const double p_hat = static_cast<double>(count) / ens.n_paths;
    curve.t.push_back(t);
    curve.p_hat.push_back(p_hat);
    curve.se.push_back(std::sqrt(p_hat * (1.0 - p_hat) / ens.n_paths));
    // lognormal survival of the principal mode
    double proxy;
    if (t <= 0.0 || a0 == 0.0) {
      proxy = (x0 * std::exp(m.pc.g * t) > epsilon) ? 1.0 : 0.0;
    } else {
      const double z = (std::log(epsilon / x0) - m.pc.g * t) / (a0 * std::sqrt(t));
      proxy = normal_sf(z);
    }
    curve.proxy.push_back(proxy);
  }
  return curve;
}

VerificationReport sup_exp_tail_check(double mu, double s1, double s2,
                                      const std::vector<double>& xs, int n_paths,
                                      double T, double dt, uint64_t seed) {
  if (!(mu > 0.0)) throw std::invalid_argument("tail check: mu must be > 0");
  if (!(s1 + s2 > 0.0)) throw std::invalid_argument("tail check: s1 + s2 must be > 0");
  for (double x : xs)
    if (x < 1.0) throw std::invalid_argument("tail check: x must be >= 1");

  const double lambda = 2.0 * mu / (s1 * s1 + s2 * s2);
  const int64_t n_steps = std::llround(T / dt);
  const double sq = std::sqrt(dt);
  const NormalStream rng(seed);
  const size_t nx = xs.size();
  std::vector<double> log_x(nx);
  for (size_t i = 0; i < nx; ++i) log_x[i] = std::log(xs[i]);

  std::vector<int64_t> counts(nx, 0);
  std::vector<double> sup_exponents(static_cast<size_t>(n_paths));
  parallel_blocks(n_paths, [&](int64_t b, int64_t e) {
    for (int64_t p = b; p < e; ++p) {
      double w1 = 0.0, w2 = 0.0;
      double sup_exp = 0.0;  // value at t = 0
      for (int64_t k = 1; k <= n_steps; ++k) {
        w1 += sq * rng.normal(static_cast<uint64_t>(p), 0, static_cast<uint64_t>(k - 1));
        w2 += sq * rng.normal(static_cast<uint64_t>(p), 1, static_cast<uint64_t>(k - 1));
        const double ex = -mu * (static_cast<double>(k) * dt) + s1 * w1 + s2 * w2;
        sup_exp = std::max(sup_exp, ex);
      }
      sup_exponents[static_cast<size_t>(p)] = sup_exp;
    }
  });
  for (int64_t p = 0; p < n_paths; ++p)
    for (size_t i = 0; i < nx; ++i)
      if (sup_exponents[static_cast<size_t>(p)] > log_x[i]) ++counts[i];

  VerificationReport rep;
  for (size_t i = 0; i < nx; ++i) {
    const double p_hat = static_cast<double>(counts[i]) / n_paths;
    const double se = std::sqrt(p_hat * (1.0 - p_hat) / n_paths);
    const double bound = std::pow(xs[i], -lambda);
    CheckResult c;
    std::ostringstream name;
    name << "sup_tail_x" << xs[i];
    c.name = name.str();
    c.measured = p_hat;
    c.oracle = bound;
    c.se = se;
    c.tol = bound + 3.0 * se;
    c.pass = p_hat <= bound + 3.0 * se;
    std::ostringstream os;
    os << "survival " << p_hat << " vs bound " << bound << " (lambda = " << lambda << ")";
    c.note = os.str();
    rep.add(c);
  }
  return rep;
}

}  // namespace stochak
