#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stochak/extreal.hpp"
#include "stochak/fields.hpp"
#include "stochak/report.hpp"
#include "stochak/spectral.hpp"

namespace stochak {

// Volatility of modes n >= 1: every mode equal to alpha0, a shared
// constant, or an explicit per-mode list (last entry repeated).
struct AlphaRestSpec {
  enum class Kind { same_as_alpha0, constant, list };
  Kind kind = Kind::same_as_alpha0;
  double constant = 0.0;
  std::vector<double> list;

  static AlphaRestSpec uniform() { return {}; }
  static AlphaRestSpec const_value(double v) { return {Kind::constant, v, {}}; }
  static AlphaRestSpec from_list(std::vector<double> v) {
    return {Kind::list, 0.0, std::move(v)};
  }
  static AlphaRestSpec parse(const std::string& s);

  double alpha(int mode, double alpha0) const;
  bool uniform_equal_alpha0() const { return kind == Kind::same_as_alpha0; }
};

struct ModelParams {
  double rho = 0.0;     // discount rate, > 0
  double sigma = 0.0;   // relative risk aversion, in (0,1) or (1,inf)
  double alpha0 = 0.0;  // principal-mode volatility, state independent
  AlphaRestSpec alpha_rest;

  void validate() const;
};

struct ModelFields {
  SpatialField A;
  SpatialField N;
  SpatialField f;
  SpatialField K0;
};

// Everything the closed-form policy needs, precomputed once.
struct PolicyConstants {
  double gamma = 0.0;            // value multiplier
  double g = 0.0;                // deterministic rate of the optimal control
  double g_tilde = 0.0;          // drift of the principal mode, g + alpha0^2/2
  double q = 0.0;                // decay rate of the discounted optimal utility
  double lambda0 = 0.0;
  SpatialField theta;            // (f/(gamma N e0))^(1/sigma)
  std::vector<double> c_n;       // <theta N, e_n>
  double u_theta = 0.0;          // quadrature(theta^(1-sigma) f) / (1-sigma)
  double h_max_coeff = 0.0;      // H_MAX(Dw(K)) = h_max_coeff * <K,e0>^(1-sigma)
};

// Assumption report entries: finiteness inequality ("discount"), field
// positivity/boundedness ("fields"), principal mode positivity ("perron"),
// and the extra requirements of the long-run theorems ("asymptotics_ready").
VerificationReport check_assumptions(const ModelParams& params,
                                     const ModelFields& fields,
                                     const EigenSystem& es);

void require_assumptions(const ModelParams& params, const ModelFields& fields,
                         const EigenSystem& es);

double compute_gamma(const ModelParams& params, const ModelFields& fields,
                     const EigenSystem& es);

PolicyConstants make_policy(const ModelParams& params, const ModelFields& fields,
                            const EigenSystem& es);

// w(K) = gamma <K,e0>^(1-sigma) / (1-sigma), with the boundary values
// 0 (sigma < 1) and -inf (sigma > 1).
ExtReal value_function_x0(double x0, const PolicyConstants& pc,
                          const ModelParams& params);
ExtReal value_function(const SpatialField& K, const PolicyConstants& pc,
                       const EigenSystem& es, const ModelParams& params);

// U(c) = integral of c^(1-sigma)/(1-sigma) * f
ExtReal utility(const SpatialField& c, const SpatialField& f, double sigma);

// H_CV(p; c) = U(c) - <cN, p>
ExtReal hamiltonian_cv(const SpatialField& p, const SpatialField& c,
                       const SpatialField& N, const SpatialField& f, double sigma);

// H_MAX(p) = integral of sigma/(1-sigma) (N p)^(-(1-sigma)/sigma) f^(1/sigma);
// requires p > 0 pointwise.
double hamiltonian_max(const SpatialField& p, const SpatialField& N,
                       const SpatialField& f, double sigma);

// argmax of H_CV(p; .): c = (N p / f)^(-1/sigma)
SpatialField maximizer_consumption(const SpatialField& p, const SpatialField& N,
                                   const SpatialField& f, double sigma);

// Closed-loop optimal consumption G(K) = <K,e0> * theta.
SpatialField feedback_consumption_x0(double x0, const PolicyConstants& pc);
SpatialField feedback_consumption(const SpatialField& K, const PolicyConstants& pc,
                                  const EigenSystem& es);

// Open-loop optimal consumption at time t given the realized beta0(t).
SpatialField open_loop_control(double t, double beta0_value, double x0_initial,
                               const PolicyConstants& pc, const ModelParams& params);

}  // namespace stochak
