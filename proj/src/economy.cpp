#include "stochak/economy.hpp"

#include <cmath>
#include <sstream>

#include "stochak/errors.hpp"

namespace stochak {

AlphaRestSpec AlphaRestSpec::parse(const std::string& s) {
  if (s == "uniform" || s == "uniform:alpha0") return uniform();
  auto colon = s.find(':');
  if (colon != std::string::npos) {
    std::string kind = s.substr(0, colon);
    std::string args = s.substr(colon + 1);
    if (kind == "const") return const_value(std::stod(args));
    if (kind == "list") {
      std::vector<double> v;
      std::stringstream ss(args);
      std::string tok;
      while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
      if (v.empty()) throw std::invalid_argument("alpha_rest: empty list");
      return from_list(std::move(v));
    }
  }
  throw std::invalid_argument("alpha_rest: expected uniform | const:v | list:v1,v2,... got '" + s + "'");
}

double AlphaRestSpec::alpha(int mode, double alpha0) const {
  if (mode == 0) return alpha0;
  switch (kind) {
    case Kind::same_as_alpha0:
      return alpha0;
    case Kind::constant:
      return constant;
    case Kind::list: {
      size_t i = static_cast<size_t>(mode - 1);
      return i < list.size() ? list[i] : list.back();
    }
  }
  return alpha0;
}

void ModelParams::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("model: rho must be > 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("model: sigma must be > 0");
  if (sigma == 1.0)
    throw std::invalid_argument("model: sigma = 1 (log utility) is not supported");
  if (alpha0 < 0.0) throw std::invalid_argument("model: alpha0 must be >= 0");
  if (alpha_rest.kind == AlphaRestSpec::Kind::constant && alpha_rest.constant < 0.0)
    throw std::invalid_argument("model: alpha_rest constant must be >= 0");
  for (double a : alpha_rest.list)
    if (a < 0.0) throw std::invalid_argument("model: alpha_rest entries must be >= 0");
}

namespace {

// rho - lambda0 (1-sigma) + alpha0^2 sigma (1-sigma) / 2; must be positive.
double discount_margin(const ModelParams& p, double lambda0) {
  return p.rho - lambda0 * (1.0 - p.sigma) +
         0.5 * p.alpha0 * p.alpha0 * p.sigma * (1.0 - p.sigma);
}

double open_loop_rate(const ModelParams& p, double lambda0) {
  return (lambda0 - p.rho) / p.sigma -
         0.5 * p.alpha0 * p.alpha0 * (2.0 - p.sigma);
}

double gamma_integral(const ModelParams& p, const ModelFields& fields,
                      const EigenSystem& es) {
  const SpatialField ne0 = fields.N * es.e0();
  if (!ne0.strictly_positive())
    throw std::domain_error("gamma: N*e0 is not strictly positive");
  const double expo = -(1.0 - p.sigma) / p.sigma;
  return quadrature(field_pow(ne0, expo) * field_pow(fields.f, 1.0 / p.sigma));
}

}  // namespace

VerificationReport check_assumptions(const ModelParams& params,
                                     const ModelFields& fields,
                                     const EigenSystem& es) {
  VerificationReport rep;
  params.validate();

  const double lambda0 = es.lambda0();
  const double bound = lambda0 * (1.0 - params.sigma) -
                       0.5 * params.sigma * (1.0 - params.sigma) * params.alpha0 * params.alpha0;
  {
    CheckResult c = CheckResult::flag("discount", params.rho > bound);
    std::ostringstream os;
    os << "rho=" << params.rho << " must exceed " << bound;
    c.note = os.str();
    rep.add(c);
  }

  const bool n_pos = fields.N.strictly_positive();
  const bool a_ok = fields.A.nonnegative();
  const bool f_ok = fields.f.nonnegative();
  rep.add(CheckResult::flag("fields", n_pos && a_ok && f_ok,
                            n_pos ? (a_ok && f_ok ? "N >= eps, A and f bounded nonnegative"
                                                  : "A or f negative")
                                  : "N not bounded away from 0"));

  rep.add(CheckResult::flag("perron", es.e0().strictly_positive(0.0),
                            "principal eigenfunction strictly positive"));

  // Diagnostics implied by the field positivity assumption; reported but
  // redundant when "fields" holds.
  try {
    const double i1 = gamma_integral(params, fields, es);
    const double i2 = quadrature(
        field_pow(fields.f / (fields.N * es.e0()), 2.0 / params.sigma));
    rep.add(CheckResult::flag("integrability", std::isfinite(i1) && std::isfinite(i2),
                              "policy integrals finite"));
  } catch (const std::exception& e) {
    rep.add(CheckResult::flag("integrability", false, e.what()));
  }

  // Extra requirements of the long-run results: lambda_1 < g and a uniform
  // volatility across modes.
  const double g = open_loop_rate(params, lambda0);
  const bool uniform = params.alpha_rest.uniform_equal_alpha0();
  const bool gap_ok = es.size() > 1 && es.lambdas[1] < g;
  {
    CheckResult c = CheckResult::flag("asymptotics_ready", uniform && gap_ok);
    std::ostringstream os;
    os << "lambda_1=" << (es.size() > 1 ? es.lambdas[1] : std::nan("")) << " vs g=" << g
       << (uniform ? "" : "; noise not uniform across modes");
    c.note = os.str();
    rep.add(c);
  }
  return rep;
}

void require_assumptions(const ModelParams& params, const ModelFields& fields,
                         const EigenSystem& es) {
  const auto rep = check_assumptions(params, fields, es);
  for (const char* name : {"discount", "fields", "perron"}) {
    const CheckResult* c = rep.find(name);
    if (c && !c->pass)
      throw AssumptionError(std::string("assumption '") + name + "' failed: " + c->note);
  }
}

double compute_gamma(const ModelParams& params, const ModelFields& fields,
                     const EigenSystem& es) {
  const double margin = discount_margin(params, es.lambda0());
  if (!(margin > 0.0))
    throw AssumptionError("gamma: discount margin not positive");
  const double integral = gamma_integral(params, fields, es);
  return std::pow(params.sigma / margin * integral, params.sigma);
}

PolicyConstants make_policy(const ModelParams& params, const ModelFields& fields,
                            const EigenSystem& es) {
  const double lambda0 = es.lambda0();
  const double gamma = compute_gamma(params, fields, es);
  const double g = open_loop_rate(params, lambda0);
  const double margin = discount_margin(params, lambda0);

  SpatialField theta =
      field_pow(fields.f / (gamma * (fields.N * es.e0())), 1.0 / params.sigma);
  const SpatialField theta_n = theta * fields.N;
  std::vector<double> c_n(static_cast<size_t>(es.size()));
  for (int n = 0; n < es.size(); ++n)
    c_n[static_cast<size_t>(n)] = inner_product(theta_n, es.modes[static_cast<size_t>(n)]);

  const double u_theta =
      quadrature(field_pow(theta, 1.0 - params.sigma) * fields.f) / (1.0 - params.sigma);

  const double integral = gamma_integral(params, fields, es);
  const double h_max_coeff =
      params.sigma / (1.0 - params.sigma) *
      std::pow(gamma, -(1.0 - params.sigma) / params.sigma) * integral;

  PolicyConstants pc{gamma,
                     g,
                     g + 0.5 * params.alpha0 * params.alpha0,
                     margin / params.sigma,
                     lambda0,
                     std::move(theta),
                     std::move(c_n),
                     u_theta,
                     h_max_coeff};

  // Construction invariants: gamma reproduces its defining identity, and the
  // forcing coefficient of the principal mode matches the closed-form rate.
  const double gamma_again = std::pow(params.sigma / margin * integral, params.sigma);
  if (std::abs(pc.gamma - gamma_again) > 1e-12 * std::abs(pc.gamma))
    throw std::runtime_error("policy: gamma failed its consistency recheck");
  const double rate_gap = pc.lambda0 - pc.c_n[0] - pc.g_tilde;
  if (std::abs(rate_gap) > 1e-10 * std::max(1.0, std::abs(pc.g_tilde)))
    throw std::runtime_error("policy: rate identity violated (lambda0 - c_0 != g + alpha0^2/2)");
  return pc;
}

ExtReal value_function_x0(double x0, const PolicyConstants& pc,
                          const ModelParams& params) {
  if (x0 < 0.0) throw std::domain_error("value function: <K,e0> < 0 is outside the domain");
  if (x0 == 0.0)
    return params.sigma < 1.0 ? ExtReal::finite(0.0) : ExtReal::neg_inf();
  return ExtReal::finite(pc.gamma * std::pow(x0, 1.0 - params.sigma) / (1.0 - params.sigma));
}

ExtReal value_function(const SpatialField& K, const PolicyConstants& pc,
                       const EigenSystem& es, const ModelParams& params) {
  return value_function_x0(inner_product(K, es.e0()), pc, params);
}

ExtReal utility(const SpatialField& c, const SpatialField& f, double sigma) {
  if (c.min_value() < 0.0) throw std::domain_error("utility: negative consumption");
  if (sigma > 1.0 && c.min_value() == 0.0) return ExtReal::neg_inf();
  return ExtReal::finite(quadrature(field_pow(c, 1.0 - sigma) * f) / (1.0 - sigma));
}

ExtReal hamiltonian_cv(const SpatialField& p, const SpatialField& c,
                       const SpatialField& N, const SpatialField& f, double sigma) {
  return utility(c, f, sigma) - inner_product(c * N, p);
}

double hamiltonian_max(const SpatialField& p, const SpatialField& N,
                       const SpatialField& f, double sigma) {
  if (!(p.min_value() > 0.0))
    throw std::domain_error("hamiltonian_max: costate must be strictly positive");
  const double expo = -(1.0 - sigma) / sigma;
  return sigma / (1.0 - sigma) *
         quadrature(field_pow(N * p, expo) * field_pow(f, 1.0 / sigma));
}

SpatialField maximizer_consumption(const SpatialField& p, const SpatialField& N,
                                   const SpatialField& f, double sigma) {
  if (!(p.min_value() > 0.0))
    throw std::domain_error("maximizer_consumption: costate must be strictly positive");
  return field_pow(f / (N * p), 1.0 / sigma);
}

SpatialField feedback_consumption_x0(double x0, const PolicyConstants& pc) {
  if (x0 < 0.0) throw std::domain_error("feedback: <K,e0> < 0 is outside the domain");
  return x0 * pc.theta;
}

SpatialField feedback_consumption(const SpatialField& K, const PolicyConstants& pc,
                                  const EigenSystem& es) {
  return feedback_consumption_x0(inner_product(K, es.e0()), pc);
}

SpatialField open_loop_control(double t, double beta0_value, double x0_initial,
                               const PolicyConstants& pc, const ModelParams& params) {
  if (t < 0.0) throw std::domain_error("open_loop_control: t < 0");
  const double amp =
      x0_initial * std::exp(pc.g * t) * std::exp(params.alpha0 * beta0_value);
  return amp * pc.theta;
}

}  // namespace stochak
