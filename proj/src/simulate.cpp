#include "stochak/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "stochak/util.hpp"

namespace stochak {

Scheme parse_scheme(const std::string& s) {
  if (s == "exact_mode") return Scheme::exact_mode;
  if (s == "euler_maruyama") return Scheme::euler_maruyama;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

std::string scheme_name(Scheme s) {
  return s == Scheme::exact_mode ? "exact_mode" : "euler_maruyama";
}

int64_t SimConfig::n_steps() const {
  const int64_t n = std::llround(T / dt);
  if (n < 1 || std::abs(static_cast<double>(n) * dt - T) > 1e-6 * std::max(1.0, T))
    throw std::invalid_argument("simulate: T must be a positive multiple of dt");
  return n;
}

void SimConfig::validate(int eigensystem_size) const {
  if (!(dt > 0.0) || dt > T) throw std::invalid_argument("simulate: need 0 < dt <= T");
  if (n_modes < 1 || n_modes > eigensystem_size)
    throw std::invalid_argument("simulate: n_modes out of range");
  if (n_paths < 1) throw std::invalid_argument("simulate: n_paths must be >= 1");
  (void)n_steps();
}

NoiseSpec NoiseSpec::from_params(const ModelParams& params, int n_modes) {
  NoiseSpec ns;
  ns.alpha0 = params.alpha0;
  ns.alphas.resize(static_cast<size_t>(n_modes));
  for (int n = 0; n < n_modes; ++n)
    ns.alphas[static_cast<size_t>(n)] = params.alpha_rest.alpha(n, params.alpha0);
  return ns;
}

Control Control::scaled_feedback(double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("control: negative feedback scale");
  Control c;
  c.kind_ = Kind::scaled_feedback;
  c.kappa_ = kappa;
  return c;
}

Control Control::zero() {
  Control c;
  c.kind_ = Kind::zero;
  return c;
}

Control Control::constant_field(SpatialField f) {
  if (f.min_value() < 0.0)
    throw std::invalid_argument("control: consumption field must be nonnegative");
  Control c;
  c.kind_ = Kind::constant_field;
  c.field_ = std::move(f);
  return c;
}

Control Control::custom(FieldFn fn) {
  Control c;
  c.kind_ = Kind::custom;
  c.fn_ = std::move(fn);
  return c;
}

SpatialField Control::consumption(double t, std::span<const double> coeffs,
                                  const Model& m) const {
  switch (kind_) {
    case Kind::scaled_feedback:
      return feedback_consumption_x0(std::max(coeffs[0], 0.0) * kappa_, m.pc);
    case Kind::zero:
      return SpatialField::constant(m.grid, 0.0);
    case Kind::constant_field:
      return *field_;
    case Kind::custom:
      return fn_(t, coeffs);
  }
  throw std::logic_error("control: bad kind");
}

LinearModeStepper::LinearModeStepper(Coeffs coeffs, double dt, Scheme scheme,
                                     uint64_t seed)
    : c_(std::move(coeffs)),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      scheme_(scheme),
      rng_(seed) {
  const size_t m = c_.lambdas.size();
  if (c_.forcing_x0.size() != m || c_.forcing_const.size() != m ||
      c_.alphas.size() != m)
    throw std::invalid_argument("stepper: coefficient arrays disagree on mode count");
  if (scheme_ == Scheme::exact_mode && c_.forcing_const[0] != 0.0)
    throw std::invalid_argument(
        "stepper: exact scheme needs a purely geometric principal mode");
  state_.resize(m);
  active_.resize(m);
}

void LinearModeStepper::reset(uint64_t path, std::span<const double> k0) {
  if (k0.size() != state_.size())
    throw std::invalid_argument("stepper: initial coefficient count mismatch");
  path_ = path;
  step_ = 0;
  beta0_ = 0.0;
  flags_ = PathFlags{};
  for (size_t n = 0; n < state_.size(); ++n) {
    state_[n] = k0[n];
    // A mode with no initial mass and no forcing stays identically zero;
    // skipping it leaves every other mode's draws untouched (counter RNG).
    active_[n] = (k0[n] != 0.0 || c_.forcing_x0[n] != 0.0 ||
                  c_.forcing_const[n] != 0.0)
                     ? 1
                     : 0;
  }
  x0_init_ = state_[0];
  if (x0_init_ < 0.0) {
    flags_.inadmissible = true;
    flags_.tau = 0.0;
  }
}

void LinearModeStepper::step() {
  if (flags_.exploded) {
    ++step_;
    return;
  }
  const int m = n_modes();
  const double x0_old = state_[0];
  const double db0 = sqrt_dt_ * rng_.normal(path_, 0, static_cast<uint64_t>(step_));
  beta0_ += db0;
  const double t_new = static_cast<double>(step_ + 1) * dt_;

  double x0_new;
  const double a0 = c_.alphas[0];
  if (scheme_ == Scheme::exact_mode) {
    x0_new = x0_init_ *
             std::exp((c_.mu0 - 0.5 * a0 * a0) * t_new + a0 * beta0_);
  } else {
    x0_new = x0_old + (c_.mu0 * x0_old - c_.forcing_const[0]) * dt_ +
             a0 * x0_old * db0;
  }
  state_[0] = x0_new;

  for (int n = 1; n < m; ++n) {
    if (!active_[static_cast<size_t>(n)]) continue;
    const size_t ni = static_cast<size_t>(n);
    const double xn = state_[ni];
    const double an = c_.alphas[ni];
    const double lam = c_.lambdas[ni];
    const double dbn =
        sqrt_dt_ * rng_.normal(path_, static_cast<uint32_t>(n), static_cast<uint64_t>(step_));
    if (scheme_ == Scheme::exact_mode) {
      const double phi = std::exp((lam - 0.5 * an * an) * dt_ + an * dbn);
      const double force_old = c_.forcing_x0[ni] * x0_old + c_.forcing_const[ni];
      const double force_new = c_.forcing_x0[ni] * x0_new + c_.forcing_const[ni];
      state_[ni] = phi * xn - 0.5 * dt_ * (phi * force_old + force_new);
    } else {
      state_[ni] = xn +
                   (lam * xn - c_.forcing_x0[ni] * x0_old - c_.forcing_const[ni]) * dt_ +
                   an * xn * dbn;
    }
  }
  ++step_;
  check_state();
}

void LinearModeStepper::check_state() {
  for (double v : state_) {
    if (!std::isfinite(v)) {
      flags_.exploded = true;
      return;
    }
  }
  if (!flags_.inadmissible && state_[0] < 0.0) {
    flags_.inadmissible = true;
    flags_.tau = t();
  }
}

LinearModeStepper::Coeffs closed_loop_coeffs(const Model& m, int n_modes) {
  return scaled_feedback_coeffs(m, 1.0, n_modes);
}

LinearModeStepper::Coeffs scaled_feedback_coeffs(const Model& m, double kappa,
                                                 int n_modes) {
  LinearModeStepper::Coeffs c;
  const size_t mm = static_cast<size_t>(n_modes);
  // At kappa = 1 the principal drift is g_tilde by the rate identity; using
  // it directly keeps the pathwise oracle exact.
  c.mu0 = (kappa == 1.0) ? m.pc.g_tilde : m.pc.lambda0 - kappa * m.pc.c_n[0];
  c.lambdas.assign(m.es.lambdas.begin(), m.es.lambdas.begin() + n_modes);
  c.forcing_x0.resize(mm);
  for (size_t n = 1; n < mm; ++n) c.forcing_x0[n] = kappa * m.pc.c_n[n];
  c.forcing_const.assign(mm, 0.0);
  const NoiseSpec ns = NoiseSpec::from_params(m.params, n_modes);
  c.alphas = ns.alphas;
  return c;
}

LinearModeStepper::Coeffs constant_forcing_coeffs(const Model& m,
                                                  const SpatialField& c_field,
                                                  int n_modes) {
  LinearModeStepper::Coeffs c;
  const size_t mm = static_cast<size_t>(n_modes);
  c.mu0 = m.pc.lambda0;
  c.lambdas.assign(m.es.lambdas.begin(), m.es.lambdas.begin() + n_modes);
  c.forcing_x0.assign(mm, 0.0);
  c.forcing_const.resize(mm);
  const SpatialField cn = c_field * m.fields.N;
  for (size_t n = 0; n < mm; ++n)
    c.forcing_const[n] = inner_product(cn, m.es.modes[n]);
  const NoiseSpec ns = NoiseSpec::from_params(m.params, n_modes);
  c.alphas = ns.alphas;
  return c;
}

namespace {

std::vector<int64_t> record_steps(int64_t n_steps, int stride) {
  if (stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  std::vector<int64_t> steps;
  for (int64_t s = 0; s <= n_steps; s += stride) steps.push_back(s);
  if (steps.back() != n_steps) steps.push_back(n_steps);
  return steps;
}

Ensemble make_ensemble_shell(const SimConfig& cfg, const std::vector<int64_t>& steps) {
  Ensemble ens;
  ens.n_modes = cfg.n_modes;
  ens.n_paths = cfg.n_paths;
  ens.dt = cfg.dt;
  ens.seed = cfg.seed;
  ens.scheme = cfg.scheme;
  ens.times.reserve(steps.size());
  for (int64_t s : steps) ens.times.push_back(static_cast<double>(s) * cfg.dt);
  const size_t total = static_cast<size_t>(cfg.n_paths) * steps.size() *
                       static_cast<size_t>(cfg.n_modes);
  if (total > (1500u << 20) / sizeof(double))
    throw std::invalid_argument(
        "ensemble would exceed the memory budget; raise record_stride");
  ens.data.resize(total);
  ens.beta0.resize(static_cast<size_t>(cfg.n_paths) * steps.size());
  ens.flags.resize(static_cast<size_t>(cfg.n_paths));
  return ens;
}

template <typename Stepper>
void fill_ensemble(Ensemble& ens, Stepper&& proto, std::span<const double> k0,
                   const std::vector<int64_t>& steps, int64_t n_steps) {
  const int n_modes = ens.n_modes;
  parallel_blocks(ens.n_paths, [&](int64_t pb, int64_t pe) {
    auto stepper = proto;  // each worker advances its own copy
    for (int64_t p = pb; p < pe; ++p) {
      stepper.reset(static_cast<uint64_t>(p), k0);
      size_t rec = 0;
      for (int64_t s = 0; s <= n_steps; ++s) {
        if (rec < steps.size() && steps[rec] == s) {
          const size_t base =
              (static_cast<size_t>(p) * steps.size() + rec) * static_cast<size_t>(n_modes);
          for (int mo = 0; mo < n_modes; ++mo)
            ens.data[base + static_cast<size_t>(mo)] = stepper.state()[static_cast<size_t>(mo)];
          ens.beta0[static_cast<size_t>(p) * steps.size() + rec] = stepper.beta0();
          ++rec;
        }
        if (s < n_steps) stepper.step();
      }
      ens.flags[static_cast<size_t>(p)] = stepper.flags();
    }
  });
}

// Generic Euler stepper for consumption suppliers without a closed forcing
// projection: the field is projected against the eigenmodes every step.
class CustomControlStepper {
 public:
  CustomControlStepper(const Model& m, Control control, const NoiseSpec& ns,
                       double dt, uint64_t seed)
      : model_(&m),
        control_(std::move(control)),
        noise_(ns),
        dt_(dt),
        sqrt_dt_(std::sqrt(dt)),
        rng_(seed),
        n_modes_(static_cast<int>(ns.alphas.size())) {
    state_.resize(static_cast<size_t>(n_modes_));
  }

  void reset(uint64_t path, std::span<const double> k0) {
    path_ = path;
    step_ = 0;
    beta0_ = 0.0;
    flags_ = PathFlags{};
    for (size_t n = 0; n < state_.size(); ++n) state_[n] = k0[n];
    if (state_[0] < 0.0) {
      flags_.inadmissible = true;
      flags_.tau = 0.0;
    }
  }

  void step() {
    if (flags_.exploded) {
      ++step_;
      return;
    }
    const SpatialField c = control_.consumption(t(), state_, *model_);
    if (c.min_value() < 0.0)
      throw std::domain_error("control returned negative consumption");
    const SpatialField cn = c * model_->fields.N;
    std::vector<double> next(state_.size());
    for (int n = 0; n < n_modes_; ++n) {
      const size_t ni = static_cast<size_t>(n);
      const double dn = inner_product(cn, model_->es.modes[ni]);
      const double an = noise_.alpha(n, state_);
      const double db =
          sqrt_dt_ * rng_.normal(path_, static_cast<uint32_t>(n), static_cast<uint64_t>(step_));
      if (n == 0) beta0_ += db;
      next[ni] = state_[ni] +
                 (model_->es.lambdas[ni] * state_[ni] - dn) * dt_ +
                 an * state_[ni] * db;
    }
    state_ = std::move(next);
    ++step_;
    for (double v : state_)
      if (!std::isfinite(v)) {
        flags_.exploded = true;
        return;
      }
    if (!flags_.inadmissible && state_[0] < 0.0) {
      flags_.inadmissible = true;
      flags_.tau = t();
    }
  }

  double t() const { return static_cast<double>(step_) * dt_; }
  double beta0() const { return beta0_; }
  std::span<const double> state() const { return state_; }
  const PathFlags& flags() const { return flags_; }

 private:
  const Model* model_;
  Control control_;
  NoiseSpec noise_;
  double dt_;
  double sqrt_dt_;
  NormalStream rng_;
  int n_modes_;
  uint64_t path_ = 0;
  int64_t step_ = 0;
  double beta0_ = 0.0;
  std::vector<double> state_;
  PathFlags flags_;
};

std::vector<double> head(std::span<const double> v, int n) {
  return std::vector<double>(v.begin(), v.begin() + n);
}

}  // namespace

Ensemble simulate_closed_loop(const Model& m, const SimConfig& cfg, int record_stride) {
  cfg.validate(m.es.size());
  const auto steps = record_steps(cfg.n_steps(), record_stride);
  Ensemble ens = make_ensemble_shell(cfg, steps);
  LinearModeStepper proto(closed_loop_coeffs(m, cfg.n_modes), cfg.dt, cfg.scheme,
                          cfg.seed);
  fill_ensemble(ens, proto, head(m.k0, cfg.n_modes), steps, cfg.n_steps());
  return ens;
}

Ensemble simulate_controlled(const Model& m, const Control& control,
                             const SimConfig& cfg, int record_stride,
                             const NoiseSpec* noise_override) {
  cfg.validate(m.es.size());
  const auto steps = record_steps(cfg.n_steps(), record_stride);
  Ensemble ens = make_ensemble_shell(cfg, steps);
  const auto k0 = head(m.k0, cfg.n_modes);

  const bool linear = control.kind() != Control::Kind::custom && !noise_override;
  if (linear) {
    LinearModeStepper::Coeffs coeffs;
    switch (control.kind()) {
      case Control::Kind::scaled_feedback:
        coeffs = scaled_feedback_coeffs(m, control.kappa(), cfg.n_modes);
        break;
      case Control::Kind::zero:
        coeffs = scaled_feedback_coeffs(m, 0.0, cfg.n_modes);
        break;
      case Control::Kind::constant_field:
        coeffs = constant_forcing_coeffs(m, control.field(), cfg.n_modes);
        break;
      default:
        throw std::logic_error("unreachable");
    }
    if (cfg.scheme == Scheme::exact_mode && coeffs.forcing_const[0] != 0.0)
      throw std::invalid_argument(
          "simulate_controlled: this control requires the euler_maruyama scheme");
    LinearModeStepper proto(std::move(coeffs), cfg.dt, cfg.scheme, cfg.seed);
    fill_ensemble(ens, proto, k0, steps, cfg.n_steps());
    return ens;
  }

  if (cfg.scheme != Scheme::euler_maruyama)
    throw std::invalid_argument(
        "simulate_controlled: custom controls require the euler_maruyama scheme");
  const NoiseSpec ns =
      noise_override ? *noise_override : NoiseSpec::from_params(m.params, cfg.n_modes);
  CustomControlStepper proto(m, control, ns, cfg.dt, cfg.seed);
  fill_ensemble(ens, proto, k0, steps, cfg.n_steps());
  return ens;
}

Ensemble detrend(const Ensemble& ens, const PolicyConstants& pc,
                 const ModelParams& params) {
  if (ens.beta0.empty())
    throw std::invalid_argument("detrend: ensemble lacks the beta0 record");
  Ensemble out = ens;
  const int stamps = ens.n_stamps();
  for (int p = 0; p < ens.n_paths; ++p) {
    for (int s = 0; s < stamps; ++s) {
      const double factor = std::exp(-pc.g * ens.times[static_cast<size_t>(s)] -
                                     params.alpha0 * ens.beta0_at(p, s));
      const size_t base = (static_cast<size_t>(p) * static_cast<size_t>(stamps) +
                           static_cast<size_t>(s)) *
                          static_cast<size_t>(ens.n_modes);
      for (int mo = 0; mo < ens.n_modes; ++mo)
        out.data[base + static_cast<size_t>(mo)] *= factor;
    }
  }
  return out;
}

double exact_mode0(double t, double x0_init, const PolicyConstants& pc,
                   const ModelParams& params, double beta0) {
  return x0_init * std::exp(pc.g_tilde * t + params.alpha0 * beta0 -
                            0.5 * params.alpha0 * params.alpha0 * t);
}

}  // namespace stochak
