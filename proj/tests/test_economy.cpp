#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stochak/errors.hpp"
#include "stochak/model.hpp"
#include "stochak/rng.hpp"

using namespace stochak;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

ModelFields b1_fields(const GridPtr& g, double f_cos_amp = 0.0) {
  return ModelFields{
      SpatialField::constant(g, 0.05), SpatialField::constant(g, 1.0),
      SpatialField::from_function(
          g, [=](double x) { return 1.0 + f_cos_amp * std::cos(x); }),
      SpatialField::constant(g, 1.0)};
}

ModelParams b1_params(double alpha0 = 0.2, double sigma = 0.5, double rho = 0.1) {
  ModelParams p;
  p.rho = rho;
  p.sigma = sigma;
  p.alpha0 = alpha0;
  return p;
}

// closed-form constant-coefficient policy constants, evaluated independently
double oracle_gamma(double rho, double sigma, double lambda0, double alpha0) {
  const double margin =
      rho - lambda0 * (1.0 - sigma) + 0.5 * alpha0 * alpha0 * sigma * (1.0 - sigma);
  return std::pow(sigma / margin * std::pow(kTwoPi, 1.5), sigma);
}
}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS(b1_params(0.2, 1.0).validate());   // log utility excluded
  CHECK_THROWS(b1_params(0.2, -0.5).validate());
  CHECK_THROWS(b1_params(-0.2).validate());
  CHECK_THROWS(b1_params(0.2, 0.5, 0.0).validate());
  CHECK_NOTHROW(b1_params(0.0, 2.0).validate());

  CHECK(AlphaRestSpec::parse("uniform").uniform_equal_alpha0());
  CHECK(AlphaRestSpec::parse("const:0.1").alpha(3, 0.2) == doctest::Approx(0.1));
  const auto list = AlphaRestSpec::parse("list:0.1,0.2");
  CHECK(list.alpha(0, 0.5) == doctest::Approx(0.5));
  CHECK(list.alpha(1, 0.5) == doctest::Approx(0.1));
  CHECK(list.alpha(5, 0.5) == doctest::Approx(0.2));
  CHECK_THROWS(AlphaRestSpec::parse("nope"));
}

TEST_CASE("assumption report") {
  const GridPtr g = make_grid(128);
  const auto fields = b1_fields(g);
  const auto es = build_eigensystem(fields.A, 8);

  SUBCASE("benchmark passes, including the long-run extras") {
    const auto rep = check_assumptions(b1_params(), fields, es);
    CHECK(rep.find("discount")->pass);   // 0.1 > 0.02
    CHECK(rep.find("fields")->pass);
    CHECK(rep.find("perron")->pass);
    CHECK(rep.find("integrability")->pass);
    CHECK(rep.find("asymptotics_ready")->pass);  // lambda_1 ~ -0.95 < g = -0.13
  }
  SUBCASE("too-small discount rate fails the finiteness inequality") {
    // rho = 0.01 vs lambda0 (1-sigma) = 0.025 at alpha0 = 0
    const auto rep = check_assumptions(b1_params(0.0, 0.5, 0.01), fields, es);
    CHECK_FALSE(rep.find("discount")->pass);
    CHECK_THROWS_AS(require_assumptions(b1_params(0.0, 0.5, 0.01), fields, es),
                    AssumptionError);
  }
  SUBCASE("non-uniform noise clears everything but the long-run flag") {
    auto p = b1_params();
    p.alpha_rest = AlphaRestSpec::const_value(0.1);
    const auto rep = check_assumptions(p, fields, es);
    CHECK(rep.find("discount")->pass);
    CHECK_FALSE(rep.find("asymptotics_ready")->pass);
  }
}

TEST_CASE("gamma matches the constant-coefficient closed form") {
  const GridPtr g = make_grid(128);
  const auto fields = b1_fields(g);
  const auto es = build_eigensystem(fields.A, 8);

  const double gamma = compute_gamma(b1_params(), fields, es);
  CHECK(gamma == doctest::Approx(oracle_gamma(0.1, 0.5, es.lambda0(), 0.2))
                     .epsilon(1e-12));
  // headline value for the benchmark
  CHECK(gamma == doctest::Approx(9.9214445).epsilon(1e-6));

  SUBCASE("deterministic counterpart dominates") {
    const double gamma_det = compute_gamma(b1_params(0.0), fields, es);
    CHECK(gamma_det == doctest::Approx(oracle_gamma(0.1, 0.5, es.lambda0(), 0.0))
                           .epsilon(1e-12));
    CHECK(gamma < gamma_det);
  }
  SUBCASE("monotone decreasing in the noise level") {
    double prev = 1e300;
    for (double a0 : {0.0, 0.1, 0.2, 0.3}) {
      const double gi = compute_gamma(b1_params(a0), fields, es);
      CHECK(gi < prev);
      prev = gi;
    }
  }
}

TEST_CASE("policy constants and the rate identity") {
  const GridPtr g = make_grid(128);
  const auto fields = b1_fields(g);
  const auto es = build_eigensystem(fields.A, 8);
  const auto pc = make_policy(b1_params(), fields, es);

  CHECK(pc.g == doctest::Approx(-0.13).epsilon(1e-12));
  CHECK(pc.g_tilde == doctest::Approx(-0.11).epsilon(1e-12));
  CHECK(pc.q == doctest::Approx(0.16).epsilon(1e-12));
  // the principal forcing coefficient equals the discount margin over sigma
  CHECK(std::abs(pc.lambda0 - pc.c_n[0] - pc.g_tilde) < 1e-10);
  // constant consumption weight: all higher forcing coefficients vanish
  for (int n = 1; n < es.size(); ++n) CHECK(std::abs(pc.c_n[static_cast<size_t>(n)]) < 1e-10);
  // theta is the constant (2 pi)/gamma^2
  CHECK(pc.theta[31] == doctest::Approx(kTwoPi / (pc.gamma * pc.gamma)).epsilon(1e-12));
}

TEST_CASE("value function closed form and boundary behavior") {
  const GridPtr g = make_grid(128);
  const auto fields = b1_fields(g);
  const auto es = build_eigensystem(fields.A, 8);
  const auto pc = make_policy(b1_params(), fields, es);
  const auto params = b1_params();

  const double x0 = std::sqrt(kTwoPi);
  const double w = value_function_x0(x0, pc, params).value();
  CHECK(w == doctest::Approx(pc.gamma * std::sqrt(x0) / 0.5).epsilon(1e-14));
  CHECK(w == doctest::Approx(31.4159265).epsilon(1e-6));
  CHECK(value_function(fields.K0, pc, es, params).value() ==
        doctest::Approx(w).epsilon(1e-12));

  SUBCASE("boundary values split on sigma") {
    CHECK(value_function_x0(0.0, pc, params).value() == 0.0);
    auto p2 = b1_params(0.2, 2.0);
    const auto es2 = build_eigensystem(fields.A, 8);
    const auto pc2 = make_policy(p2, fields, es2);
    CHECK(value_function_x0(0.0, pc2, p2).is_neg_inf());
    CHECK_THROWS(value_function_x0(-1.0, pc, params));
  }
  SUBCASE("power homogeneity in the initial capital") {
    for (double a : {0.5, 2.0, 7.0}) {
      const double lhs = value_function_x0(a * x0, pc, params).value();
      const double rhs = std::pow(a, 0.5) * w;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    }
  }
}

TEST_CASE("utility closed forms") {
  const GridPtr g = make_grid(64);
  const auto one = SpatialField::constant(g, 1.0);

  CHECK(utility(one, one, 0.5).value() == doctest::Approx(2.0 * kTwoPi).epsilon(1e-13));
  CHECK(utility(SpatialField::constant(g, 0.0), one, 0.5).value() == 0.0);
  CHECK(utility(SpatialField::constant(g, 4.0), one, 2.0).value() ==
        doctest::Approx(-std::numbers::pi / 2.0).epsilon(1e-13));
  CHECK(utility(SpatialField::constant(g, 0.0), one, 2.0).is_neg_inf());
  CHECK_THROWS(utility(SpatialField::constant(g, -1.0), one, 0.5));
}

TEST_CASE("Hamiltonians") {
  const GridPtr g = make_grid(64);
  const auto one = SpatialField::constant(g, 1.0);

  SUBCASE("closed form at unit costate") {
    // integrand sigma/(1-sigma) * 1 at sigma = 1/2
    CHECK(hamiltonian_max(one, one, one, 0.5) == doctest::Approx(kTwoPi).epsilon(1e-13));
  }
  SUBCASE("envelope identity and dominance") {
    NormalStream rng(5);
    for (uint64_t trial = 0; trial < 10; ++trial) {
      const double level = 0.3 + rng.uniform(trial, 0, 0);
      const auto p = SpatialField::constant(g, level);
      const auto cstar = maximizer_consumption(p, one, one, 0.5);
      const double hmax = hamiltonian_max(p, one, one, 0.5);
      const double hcv = hamiltonian_cv(p, cstar, one, one, 0.5).value();
      CHECK(hcv == doctest::Approx(hmax).epsilon(1e-10));

      // any other admissible consumption does worse
      const auto c = SpatialField::from_function(g, [&](double x) {
        return 0.1 + 0.05 * std::sin(x + static_cast<double>(trial));
      });
      CHECK(hamiltonian_cv(p, c, one, one, 0.5).value() <= hmax + 1e-12);
    }
  }
  SUBCASE("zero consumption gives zero current value for sigma < 1") {
    const auto zero = SpatialField::constant(g, 0.0);
    CHECK(hamiltonian_cv(one, zero, one, one, 0.5).value() == 0.0);
  }
  SUBCASE("nonpositive costate rejected") {
    CHECK_THROWS(hamiltonian_max(SpatialField::constant(g, 0.0), one, one, 0.5));
    CHECK_THROWS(maximizer_consumption(SpatialField::constant(g, -1.0), one, one, 0.5));
  }
}

TEST_CASE("feedback and open-loop controls") {
  const GridPtr g = make_grid(128);
  const auto fields = b1_fields(g);
  const auto es = build_eigensystem(fields.A, 8);
  const auto params = b1_params();
  const auto pc = make_policy(params, fields, es);
  const double x0 = std::sqrt(kTwoPi);

  SUBCASE("benchmark feedback is the constant 0.16") {
    const auto c = feedback_consumption(fields.K0, pc, es);
    CHECK(c[10] == doctest::Approx(0.16).epsilon(1e-12));
  }
  SUBCASE("boundary gives the null control") {
    const auto c = feedback_consumption_x0(0.0, pc);
    CHECK(c.max_value() == 0.0);
    CHECK_THROWS(feedback_consumption_x0(-0.1, pc));
  }
  SUBCASE("linear in the principal component") {
    const auto c1 = feedback_consumption_x0(x0, pc);
    const auto c3 = feedback_consumption_x0(3.0 * x0, pc);
    CHECK(c3[5] == doctest::Approx(3.0 * c1[5]).epsilon(1e-14));
  }
  SUBCASE("open loop at time zero matches the feedback") {
    const auto a = open_loop_control(0.0, 0.0, x0, pc, params);
    const auto b = feedback_consumption_x0(x0, pc);
    for (int i = 0; i < g->n(); ++i) CHECK(a[i] == b[i]);
  }
  SUBCASE("open loop decays at the closed-form rate") {
    const auto a = open_loop_control(10.0, 0.0, x0, pc, params);
    const auto b = feedback_consumption_x0(x0, pc);
    CHECK(a[3] == doctest::Approx(b[3] * std::exp(-1.3)).epsilon(1e-12));
  }
  SUBCASE("no noise reduces the rate to (lambda0 - rho)/sigma") {
    const auto pc0 = make_policy(b1_params(0.0), fields, es);
    CHECK(pc0.g == doctest::Approx((es.lambda0() - 0.1) / 0.5).epsilon(1e-12));
  }
}

TEST_CASE("model assembly guards") {
  const GridPtr g = make_grid(128);
  CHECK_NOTHROW(make_model(b1_fields(g), b1_params(), 8));

  ModelFields bad_n{SpatialField::constant(g, 0.05), SpatialField::constant(g, 0.0),
                    SpatialField::constant(g, 1.0), SpatialField::constant(g, 1.0)};
  CHECK_THROWS(make_model(std::move(bad_n), b1_params(), 8));

  ModelFields bad_k0{SpatialField::constant(g, 0.05), SpatialField::constant(g, 1.0),
                     SpatialField::constant(g, 1.0), SpatialField::constant(g, -1.0)};
  CHECK_THROWS(make_model(std::move(bad_k0), b1_params(), 8));
}
