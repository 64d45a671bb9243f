#pragma once

#include <cstdint>
#include <vector>

#include "stochak/extreal.hpp"
#include "stochak/model.hpp"
#include "stochak/report.hpp"
#include "stochak/simulate.hpp"

namespace stochak {

// Residual of the closed-form value candidate in the stationary equation
//   rho w = <K, L Dw> + H_MAX(Dw) - sigma gamma <K,e0>^(1-sigma) alpha0^2 / 2.
// All derivative terms are closed forms; no numerical differentiation.
double hjb_residual(const SpatialField& K, const Model& m);

// Closed-form J of the optimal strategy; identical to the value function by
// construction, exposed under its own name as the Monte Carlo oracle.
ExtReal analytic_J_optimal(double x0, const PolicyConstants& pc,
                           const ModelParams& params);

struct JConfig {
  double T = 80.0;
  double dt = 0.01;
  int n_paths = 10000;
  uint64_t seed = 1;
  Scheme scheme = Scheme::exact_mode;
  bool analytic_tail = true;  // only honored for the optimal feedback
  double x0_scale = 1.0;      // scales the initial condition (and the control)
};

struct JEstimate {
  double value = 0.0;
  double se = 0.0;
  int n_used = 0;
  int n_excluded = 0;
  bool neg_inf = false;
  double tail_bound = 0.0;  // e^{-rho T} * running max |U|, generic controls
  bool tail_corrected = false;
  std::vector<double> per_path;  // discounted utility per included path
};

// Discounted-utility Monte Carlo: trapezoid in time over [0, T], horizon
// corrected analytically for the optimal feedback (exact decay rate of the
// discounted utility), reported as a truncation bound otherwise.
// Inadmissible paths are excluded and counted.
JEstimate estimate_J(const Model& m, const Control& control, const JConfig& cfg);

struct GapEstimate {
  double value = 0.0;
  double se = 0.0;
  int n_used = 0;
  double exclusion_fraction = 0.0;
  bool supported = true;  // the identity is proved for sigma in (0,1)
};

// Monte Carlo estimate of the expected discounted Hamiltonian gap
// E int e^{-rho s} [H_MAX(Dw(K)) - H_CV(Dw(K); c)] ds along the controlled
// paths; equals w(K0) - J(c) for admissible controls.
GapEstimate fundamental_identity_gap(const Model& m, const Control& control,
                                     const JConfig& cfg);

struct HsDiagnostics {
  double time_integrated_full = 0.0;
  double time_integrated_half = 0.0;
  double trace_full = 0.0;
  double trace_half = 0.0;
  double rel_change_time = 0.0;
  double rel_change_trace = 0.0;
};

// Truncated Hilbert-Schmidt sums behind the noise well-posedness: the
// time-integrated smoothed norm and Tr(BB*), with their change when the
// truncation halves.
HsDiagnostics hs_wellposedness(const NoiseSpec& noise, const EigenSystem& es,
                               const std::vector<double>& k_coeffs, double T,
                               int n_modes);

// Empirical Lipschitz constant of k -> e^{tL} B(k) over random field pairs
// in the truncated Hilbert-Schmidt norm.
double lipschitz_probe(const NoiseSpec& noise, const EigenSystem& es, int trials,
                       double t, uint64_t seed);

struct MomentBoundResult {
  double reference_constant = 0.0;        // fitted C_p on the reference run
  std::vector<double> perturbed_ratios;   // sup_t E|K|^p / (1 + |K0|^p)
  bool pass = false;
};

// Theorem-style moment envelope: C_p fitted on the reference initial datum,
// perturbed initial data must stay below safety * C_p.
MomentBoundResult moment_bound_check(const Model& m, double p,
                                     const std::vector<std::vector<double>>& perturbed_k0,
                                     const SimConfig& cfg, int check_stamps,
                                     double safety = 1.5);

// Mean terminal gap between the Euler and the exact principal-mode schemes
// driven by the same increments; O(dt), used for the weak-order check.
double em_mode0_mean_gap(const Model& m, double T, double dt, int n_paths,
                         uint64_t seed);

struct VerifyConfig {
  double T = 80.0;
  double dt = 0.01;
  int n_paths = 10000;
  int em_paths = 10000;  // scheme-comparison sample size
  uint64_t seed = 20240901;
  double k_sigma = 3.0;
  int hjb_states = 10;
  int lipschitz_trials = 64;
  double hs_T = 5.0;
};

// The full optimality/well-posedness battery used by the `verify` command.
VerificationReport run_verification_suite(const Model& m, const VerifyConfig& cfg);

}  // namespace stochak
