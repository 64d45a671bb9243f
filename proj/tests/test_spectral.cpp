#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stochak/spectral.hpp"

using namespace stochak;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

SpatialField const_field(int n, double v) {
  return SpatialField::constant(make_grid(n), v);
}
}  // namespace

TEST_CASE("operator matrix structure") {
  SUBCASE("zero technology: constants in the kernel") {
    const auto A = const_field(64, 0.0);
    const auto m = build_operator_matrix(A);
    for (int i = 0; i < 64; ++i) CHECK(m.row(i).sum() == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("constant technology shifts the diagonal") {
    const auto m0 = build_operator_matrix(const_field(64, 0.0));
    const auto ma = build_operator_matrix(const_field(64, 0.3));
    CHECK(((ma - m0).diagonal().array() - 0.3).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("symmetric by construction") {
    const GridPtr g = make_grid(128);
    const auto A = SpatialField::from_function(
        g, [](double x) { return 0.05 + 0.1 * std::cos(x); });
    const auto m = build_operator_matrix(A);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("constant-technology eigenvalues match the closed form") {
  // continuum spectrum of d^2/dx^2 + a on the circle: a - m^2, sin/cos pairs
  const auto es = build_eigensystem(const_field(256, 0.05), 5);
  const double expected[5] = {0.05, -0.95, -0.95, -3.95, -3.95};
  for (int i = 0; i < 5; ++i)
    CHECK(std::abs(es.lambdas[static_cast<size_t>(i)] - expected[i]) < 5e-3);
  CHECK(es.e0()[100] == doctest::Approx(1.0 / std::sqrt(kTwoPi)).epsilon(1e-8));

  // second-order convergence: doubling the grid shrinks the error ~4x
  const auto es2 = build_eigensystem(const_field(512, 0.05), 5);
  const double err1 = std::abs(es.lambdas[1] - (-0.95));
  const double err2 = std::abs(es2.lambdas[1] - (-0.95));
  CHECK(err1 / err2 > 3.5);
  CHECK(err1 / err2 < 4.5);
}

TEST_CASE("zero technology: principal pair is the constant") {
  const auto es = build_eigensystem(const_field(128, 0.0), 3);
  CHECK(std::abs(es.lambdas[0]) < 1e-10);
  for (int i = 0; i < 128; ++i)
    CHECK(es.e0()[i] == doctest::Approx(1.0 / std::sqrt(kTwoPi)).epsilon(1e-10));
}

TEST_CASE("variable technology: refinement oracle and Perron positivity") {
  auto make_A = [](int n) {
    return SpatialField::from_function(
        make_grid(n), [](double x) { return 0.05 + 0.1 * std::cos(x); });
  };
  const auto es1 = build_eigensystem(make_A(128), 8);
  const auto es2 = build_eigensystem(make_A(256), 8);
  CHECK(std::abs(es1.lambda0() - es2.lambda0()) < 1e-4);
  CHECK(es1.e0().strictly_positive(0.0));
  CHECK(es2.e0().strictly_positive(0.0));

  // a few more strictly positive technologies
  for (double amp : {0.02, 0.04}) {
    const auto A = SpatialField::from_function(make_grid(128), [amp](double x) {
      return 0.05 + amp * std::cos(x) + 0.5 * amp * std::sin(2 * x);
    });
    CHECK(build_eigensystem(A, 4).e0().strictly_positive(0.0));
  }
}

TEST_CASE("orthonormality and Rayleigh identity") {
  const GridPtr g = make_grid(128);
  const auto A = SpatialField::from_function(
      g, [](double x) { return 0.05 + 0.1 * std::cos(x); });
  const auto op = build_operator_matrix(A);
  const auto es = eigendecompose(op, g, 10);

  for (int a = 0; a < es.size(); ++a)
    for (int b = 0; b < es.size(); ++b) {
      const double ip = inner_product(es.modes[static_cast<size_t>(a)],
                                      es.modes[static_cast<size_t>(b)]);
      CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-10);
    }

  for (int n = 0; n < es.size(); ++n) {
    Eigen::VectorXd v(g->n());
    for (int i = 0; i < g->n(); ++i) v(i) = es.modes[static_cast<size_t>(n)][i];
    const double rayleigh = v.dot(op * v) / v.dot(v);
    CHECK(rayleigh == doctest::Approx(es.lambdas[static_cast<size_t>(n)]).epsilon(1e-8));
  }
}

TEST_CASE("project and reconstruct") {
  const auto es = build_eigensystem(const_field(128, 0.05), 6);

  SUBCASE("eigenmode projects to a unit slot") {
    const auto c = project(es.modes[1], es);
    for (int n = 0; n < 6; ++n)
      CHECK(std::abs(c[static_cast<size_t>(n)] - (n == 1 ? 1.0 : 0.0)) < 1e-10);
  }
  SUBCASE("constants load the principal mode only") {
    const auto c = project(SpatialField::constant(es.grid, 1.0), es);
    CHECK(c[0] == doctest::Approx(std::sqrt(kTwoPi)).epsilon(1e-12));
    for (int n = 1; n < 6; ++n) CHECK(std::abs(c[static_cast<size_t>(n)]) < 1e-10);
  }
  SUBCASE("linearity") {
    const auto K = affine(es.modes[0], 2.0, 0.0) + affine(es.modes[2], 3.0, 0.0);
    const auto c = project(K, es);
    CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(c[2] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(std::abs(c[1]) < 1e-10);
  }
  SUBCASE("round trip on coefficients") {
    std::vector<double> coeffs{0.3, -1.2, 0.0, 2.5, 0.1, -0.7};
    const auto K = reconstruct(coeffs, es);
    const auto back = project(K, es);
    for (int n = 0; n < 6; ++n)
      CHECK(back[static_cast<size_t>(n)] ==
            doctest::Approx(coeffs[static_cast<size_t>(n)]).epsilon(1e-10));
    CHECK_THROWS(reconstruct(std::vector<double>{1.0, 2.0}, es));
  }
}

TEST_CASE("degenerate principal eigenvalue is a hard error") {
  const GridPtr g = make_grid(8);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(8, 8);
  CHECK_THROWS(eigendecompose(identity, g, 2));
}

TEST_CASE("mode count validation") {
  const auto A = const_field(64, 0.05);
  CHECK_THROWS(build_eigensystem(A, 0));
  CHECK_THROWS(build_eigensystem(A, 65));
}
