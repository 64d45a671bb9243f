#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochak/model.hpp"
#include "stochak/rng.hpp"

namespace stochak {

enum class Scheme { exact_mode, euler_maruyama };

Scheme parse_scheme(const std::string& s);
std::string scheme_name(Scheme s);

struct SimConfig {
  double T = 1.0;
  double dt = 0.01;
  int n_modes = 16;
  int n_paths = 1;
  uint64_t seed = 0;
  Scheme scheme = Scheme::exact_mode;

  int64_t n_steps() const;
  void validate(int eigensystem_size) const;
};

// Diagonal multiplicative noise: one Brownian mode per retained eigenmode.
// Constant weights by default; per-mode state-dependent weights are allowed
// for the generic Euler simulation and the noise diagnostics.
struct NoiseSpec {
  double alpha0 = 0.0;
  std::vector<double> alphas;  // per mode, size = n_modes
  using StateFn = std::function<double(std::span<const double>)>;
  std::vector<StateFn> state_fns;  // empty, or size = n_modes

  bool state_dependent() const { return !state_fns.empty(); }
  double alpha(int mode, std::span<const double> state) const {
    if (state_dependent() && state_fns[static_cast<size_t>(mode)])
      return state_fns[static_cast<size_t>(mode)](state);
    return alphas[static_cast<size_t>(mode)];
  }

  static NoiseSpec from_params(const ModelParams& params, int n_modes);
};

struct PathFlags {
  bool exploded = false;
  bool inadmissible = false;
  double tau = std::numeric_limits<double>::quiet_NaN();  // first exit time
};

// Mode-coefficient paths at recorded stamps, plus the beta0 record needed
// for detrending. Bit-reproducible from (seed, scheme, dt, modes, paths).
struct Ensemble {
  std::vector<double> times;
  int n_modes = 0;
  int n_paths = 0;
  double dt = 0.0;
  uint64_t seed = 0;
  Scheme scheme = Scheme::exact_mode;
  std::vector<double> data;   // [path][stamp][mode]
  std::vector<double> beta0;  // [path][stamp]
  std::vector<PathFlags> flags;

  int n_stamps() const { return static_cast<int>(times.size()); }
  double value(int path, int stamp, int mode) const {
    return data[(static_cast<size_t>(path) * static_cast<size_t>(n_stamps()) +
                 static_cast<size_t>(stamp)) *
                    static_cast<size_t>(n_modes) +
                static_cast<size_t>(mode)];
  }
  double beta0_at(int path, int stamp) const {
    return beta0[static_cast<size_t>(path) * static_cast<size_t>(n_stamps()) +
                 static_cast<size_t>(stamp)];
  }
};

// Consumption strategies the simulator understands. The first three have
// closed forcing projections, so paths advance in O(n_modes) per step; a
// custom supplier is projected numerically every step.
class Control {
 public:
  enum class Kind { scaled_feedback, zero, constant_field, custom };
  using FieldFn =
      std::function<SpatialField(double t, std::span<const double> coeffs)>;

  static Control optimal_feedback() { return scaled_feedback(1.0); }
  static Control scaled_feedback(double kappa);
  static Control zero();
  static Control constant_field(SpatialField c);
  static Control custom(FieldFn fn);

  Kind kind() const { return kind_; }
  double kappa() const { return kappa_; }
  const SpatialField& field() const { return *field_; }
  const FieldFn& fn() const { return fn_; }

  // Consumption as a field, for replay in functional estimators.
  SpatialField consumption(double t, std::span<const double> coeffs,
                           const Model& m) const;

 private:
  Kind kind_ = Kind::zero;
  double kappa_ = 0.0;
  std::optional<SpatialField> field_;
  FieldFn fn_;
};

// One path of the coupled mode SDEs
//   dX_0 = mu0 X_0 dt - d_0 dt + a_0 X_0 dbeta_0
//   dX_n = lambda_n X_n dt - (f_n X_0 + d_n) dt + a_n X_n dbeta_n
// advanced either by Euler-Maruyama or by the exact per-mode update
// (geometric factor for X_0, integrating factor with a one-step trapezoid
// on the forcing for n >= 1). The exact scheme requires d_0 = 0.
class LinearModeStepper {
 public:
  struct Coeffs {
    double mu0 = 0.0;
    std::vector<double> lambdas;
    std::vector<double> forcing_x0;     // f_n (f_0 folded into mu0)
    std::vector<double> forcing_const;  // d_n
    std::vector<double> alphas;
  };

  LinearModeStepper(Coeffs coeffs, double dt, Scheme scheme, uint64_t seed);

  void reset(uint64_t path, std::span<const double> k0);
  void step();

  int64_t step_index() const { return step_; }
  double t() const { return static_cast<double>(step_) * dt_; }
  double beta0() const { return beta0_; }
  std::span<const double> state() const { return state_; }
  double x0() const { return state_[0]; }
  const PathFlags& flags() const { return flags_; }
  int n_modes() const { return static_cast<int>(state_.size()); }

 private:
  Coeffs c_;
  double dt_;
  double sqrt_dt_;
  Scheme scheme_;
  NormalStream rng_;
  uint64_t path_ = 0;
  int64_t step_ = 0;
  double beta0_ = 0.0;
  double x0_init_ = 0.0;
  std::vector<double> state_;
  std::vector<char> active_;
  PathFlags flags_;

  void check_state();
};

LinearModeStepper::Coeffs closed_loop_coeffs(const Model& m, int n_modes);
LinearModeStepper::Coeffs scaled_feedback_coeffs(const Model& m, double kappa,
                                                 int n_modes);
LinearModeStepper::Coeffs constant_forcing_coeffs(const Model& m,
                                                  const SpatialField& c,
                                                  int n_modes);

// Optimal closed-loop capital dynamics.
Ensemble simulate_closed_loop(const Model& m, const SimConfig& cfg,
                              int record_stride = 1);

// Arbitrary admissible control, Euler-Maruyama; an admissibility monitor
// flags paths whose principal component goes negative and records the exit
// time. Per-mode state-dependent noise is allowed here.
Ensemble simulate_controlled(const Model& m, const Control& control,
                             const SimConfig& cfg, int record_stride = 1,
                             const NoiseSpec* noise_override = nullptr);

// K_g(t) = exp(-g t - alpha0 beta0(t)) K(t), per path and stamp.
Ensemble detrend(const Ensemble& ens, const PolicyConstants& pc,
                 const ModelParams& params);

// Pathwise oracle for the principal mode of the optimal path:
// x0_init * exp(g_tilde t + alpha0 beta0 - alpha0^2 t / 2).
double exact_mode0(double t, double x0_init, const PolicyConstants& pc,
                   const ModelParams& params, double beta0);

}  // namespace stochak
