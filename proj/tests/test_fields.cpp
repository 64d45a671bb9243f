#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stochak/fields.hpp"
#include "stochak/rng.hpp"

using namespace stochak;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

SpatialField random_field(const GridPtr& grid, uint64_t trial, uint32_t stream) {
  NormalStream rng(99);
  std::vector<double> v(static_cast<size_t>(grid->n()));
  for (int i = 0; i < grid->n(); ++i)
    v[static_cast<size_t>(i)] = rng.normal(trial, stream, static_cast<uint64_t>(i));
  return SpatialField(grid, std::move(v));
}
}  // namespace

TEST_CASE("grid layout and validation") {
  const GridPtr g = make_grid(64);
  CHECK(g->n() == 64);
  CHECK(g->x()[0] == 0.0);
  CHECK(g->x()[1] == doctest::Approx(g->spacing()));
  CHECK(g->x()[63] == doctest::Approx(kTwoPi - g->spacing()));
  for (int i = 1; i < 64; ++i) CHECK(g->x()[i] > g->x()[i - 1]);
  CHECK_THROWS(make_grid(6));
  CHECK_THROWS(make_grid(65));
}

TEST_CASE("field construction rejects bad values") {
  const GridPtr g = make_grid(8);
  CHECK_THROWS(SpatialField(g, std::vector<double>(7, 1.0)));
  std::vector<double> v(8, 1.0);
  v[3] = std::nan("");
  CHECK_THROWS(SpatialField(g, v));
}

TEST_CASE("quadrature of closed forms") {
  const GridPtr g = make_grid(64);
  CHECK(quadrature(SpatialField::constant(g, 1.0)) == doctest::Approx(kTwoPi).epsilon(1e-14));
  const auto cosx = SpatialField::from_function(g, [](double x) { return std::cos(x); });
  CHECK(std::abs(quadrature(cosx)) < 1e-12);

  // constant sqrt(2 pi) integrates to (2 pi)^{3/2}; refining the grid must
  // not move the value
  const double expected = std::pow(kTwoPi, 1.5);
  for (int n : {64, 128, 256}) {
    const GridPtr gn = make_grid(n);
    const double got = quadrature(SpatialField::constant(gn, std::sqrt(kTwoPi)));
    CHECK(got == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("periodic trapezoid is exact on low-degree trig polynomials") {
  const GridPtr g = make_grid(64);
  for (int k = 1; k < 32; ++k) {
    const auto f = SpatialField::from_function(
        g, [k](double x) { return std::cos(k * x) * std::cos(k * x); });
    CHECK(quadrature(f) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  }
}

TEST_CASE("inner product oracles") {
  const GridPtr g = make_grid(64);
  const auto e0 = SpatialField::constant(g, 1.0 / std::sqrt(kTwoPi));
  CHECK(inner_product(e0, e0) == doctest::Approx(1.0).epsilon(1e-14));

  const auto c = SpatialField::from_function(
      g, [](double x) { return std::cos(x) / std::sqrt(std::numbers::pi); });
  const auto s = SpatialField::from_function(
      g, [](double x) { return std::sin(x) / std::sqrt(std::numbers::pi); });
  CHECK(std::abs(inner_product(c, s)) < 1e-12);

  const auto one = SpatialField::constant(g, 1.0);
  CHECK(inner_product(one, e0) == doctest::Approx(std::sqrt(kTwoPi)).epsilon(1e-14));

  const GridPtr other = make_grid(32);
  CHECK_THROWS(inner_product(one, SpatialField::constant(other, 1.0)));
}

TEST_CASE("quadrature linearity and positivity on random fields") {
  const GridPtr g = make_grid(64);
  for (uint64_t trial = 0; trial < 20; ++trial) {
    const auto f = random_field(g, trial, 0);
    const auto h = random_field(g, trial, 1);
    const double a = 1.7, b = -0.3;
    const double lhs = quadrature(affine(f, a, 0.0) + affine(h, b, 0.0));
    const double rhs = a * quadrature(f) + b * quadrature(h);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

    // positivity
    const auto fpos = f * f;
    CHECK(quadrature(fpos) >= 0.0);

    // symmetry and Cauchy-Schwarz
    CHECK(inner_product(f, h) == doctest::Approx(inner_product(h, f)).epsilon(1e-12));
    CHECK(std::abs(inner_product(f, h)) <=
          norm_l2(f) * norm_l2(h) * (1.0 + 1e-12));
  }
}

TEST_CASE("pointwise power domain rules") {
  const GridPtr g = make_grid(8);
  const auto four = SpatialField::constant(g, 4.0);
  const auto two = field_pow(four, 0.5);
  CHECK(two[0] == doctest::Approx(2.0));

  std::vector<double> v(8, 1.0);
  v[2] = 0.0;
  const SpatialField with_zero(g, v);
  CHECK(field_pow(with_zero, 0.5)[2] == 0.0);
  CHECK_THROWS(field_pow(with_zero, -1.0));

  std::vector<double> neg(8, 1.0);
  neg[1] = -2.0;
  const SpatialField with_neg(g, neg);
  CHECK_THROWS(field_pow(with_neg, 0.5));
  CHECK(field_pow(with_neg, 2.0)[1] == doctest::Approx(4.0));
}

TEST_CASE("theta composite field matches the constant-coefficient value") {
  // benchmark values: A = 0.05, N = f = 1, sigma = 0.5, rho = 0.1,
  // alpha0 = 0.2, so gamma = sqrt(0.5/0.08 * (2pi)^{3/2}) and
  // theta = (1/(gamma e0))^2 is constant
  const double gamma = std::sqrt(0.5 / 0.08 * std::pow(kTwoPi, 1.5));
  const GridPtr g = make_grid(64);
  const auto e0 = SpatialField::constant(g, 1.0 / std::sqrt(kTwoPi));
  const auto one = SpatialField::constant(g, 1.0);
  const auto theta = field_pow(one / (gamma * (one * e0)), 2.0);
  const double expected = kTwoPi / (gamma * gamma);
  CHECK(theta[17] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.063830764864229).epsilon(1e-9));
}

TEST_CASE("field recipes") {
  const GridPtr g = make_grid(16);
  const auto c = parse_field_recipe(g, "const:0.05");
  CHECK(c[3] == doctest::Approx(0.05));

  const auto fc = parse_field_recipe(g, "cos:1.0,0.5,1");
  CHECK(fc[0] == doctest::Approx(1.5));

  const auto fs = parse_field_recipe(g, "sin:0,1,2");
  CHECK(fs[2] == doctest::Approx(std::sin(2.0 * g->x()[2])));

  std::string samples = "samples:";
  for (int i = 0; i < 16; ++i) samples += (i ? "," : "") + std::to_string(i);
  const auto fv = parse_field_recipe(g, samples);
  CHECK(fv[7] == doctest::Approx(7.0));

  CHECK_THROWS(parse_field_recipe(g, "const"));
  CHECK_THROWS(parse_field_recipe(g, "blah:1"));
  CHECK_THROWS(parse_field_recipe(g, "samples:1,2,3"));
  CHECK_THROWS(parse_field_recipe(g, "cos:1.0,0.5"));
}

TEST_CASE("strict positivity helper") {
  const GridPtr g = make_grid(8);
  CHECK(SpatialField::constant(g, 0.05).strictly_positive());
  CHECK_FALSE(SpatialField::constant(g, 0.0).strictly_positive());
  CHECK_FALSE(SpatialField::constant(g, 1e-13).strictly_positive());
}
