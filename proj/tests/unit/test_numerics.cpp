#include "hybavg/errors.hpp"
#include "hybavg/numerics.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace hybavg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("central-difference Jacobian of a smooth map") {
  const auto f = [](const Vector& x) {
    Vector y(2);
    y << std::sin(x(0)) * x(1), x(0) * x(0) + std::exp(x(1));
    return y;
  };
  Vector x(2);
  x << 0.3, -0.7;
  const Matrix J = numerics::jacobian_fd(f, x, 6e-6);
  Matrix exact(2, 2);
  exact << std::cos(0.3) * -0.7, std::sin(0.3), 0.6, std::exp(-0.7);
  CHECK((J - exact).norm() < 1e-9);
}

TEST_CASE("gradient uses the same step rule") {
  const auto f = [](const Vector& x) { return x.squaredNorm(); };
  Vector x(3);
  x << 1.0, -2.0, 0.5;
  CHECK((numerics::gradient_fd(f, x, 6e-6) - 2.0 * x).norm() < 1e-9);
}

TEST_CASE("polyfit recovers an exact quadratic") {
  const std::vector<double> x{0.1, 0.2, 0.4, 0.8, 1.6};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 - 2.0 * v + 0.5 * v * v);
  const Vector c = numerics::polyfit(x, y, 2);
  CHECK_THAT(c(0), WithinAbs(3.0, 1e-12));
  CHECK_THAT(c(1), WithinAbs(-2.0, 1e-12));
  CHECK_THAT(c(2), WithinAbs(0.5, 1e-12));
}

TEST_CASE("log-log slope and fitted order") {
  const auto x = numerics::logspace(1e-3, 1e-1, 6);
  std::vector<double> y;
  for (double v : x) y.push_back(7.0 * v * v);
  CHECK_THAT(numerics::loglog_slope(x, y), WithinAbs(2.0, 1e-12));
  CHECK_THAT(numerics::fitted_order(x, y, 1e-12), WithinAbs(2.0, 1e-12));

  SECTION("series below the floor reports an infinite order") {
    const std::vector<double> tiny(x.size(), 1e-14);
    CHECK(std::isinf(numerics::fitted_order(x, tiny, 1e-9)));
  }
}

TEST_CASE("logspace endpoints and ratio") {
  const auto v = numerics::logspace(0.01, 0.5, 8);
  REQUIRE(v.size() == 8);
  CHECK_THAT(v.front(), WithinRel(0.01, 1e-14));
  CHECK_THAT(v.back(), WithinRel(0.5, 1e-14));
  for (std::size_t i = 2; i < v.size(); ++i)
    CHECK_THAT(v[i] / v[i - 1], WithinRel(v[1] / v[0], 1e-12));
}

TEST_CASE("spectral distance is invariant to eigenvalue ordering") {
  ComplexVector a(3), b(3);
  a << 1.0, std::complex<double>(0.5, 0.2), -0.3;
  b << -0.31, 1.02, std::complex<double>(0.5, 0.19);
  CHECK_THAT(numerics::spectral_distance(a, b), WithinAbs(0.02, 1e-12));
  CHECK_THAT(numerics::spectral_distance(b, a), WithinAbs(0.02, 1e-12));
}

TEST_CASE("spectral radius and unit-circle distance") {
  Matrix m(2, 2);
  m << 0.5, 1.0, 0.0, -0.9;
  CHECK_THAT(numerics::spectral_radius(m), WithinAbs(0.9, 1e-14));
  CHECK_THAT(numerics::unit_circle_distance(m), WithinAbs(0.1, 1e-14));
}

TEST_CASE("adaptive Simpson quadrature") {
  const auto f = [](double s) { return Vector::Constant(1, std::sin(s) * std::sin(s)); };
  const Vector v = numerics::integrate_simpson(f, 0.0, std::numbers::pi, 1e-12, 40, 5);
  CHECK_THAT(v(0), WithinAbs(std::numbers::pi / 2.0, 1e-11));

  SECTION("zero integrand") {
    const auto z = [](double) { return Vector::Zero(2); };
    CHECK(numerics::integrate_simpson(z, 0.0, 1.0, 1e-10, 40, 5).norm() == 0.0);
  }
  SECTION("refinement budget is enforced") {
    const auto rough = [](double s) { return Vector::Constant(1, s > 0.123456 ? 1.0 : 0.0); };
    CHECK_THROWS_AS(numerics::integrate_simpson(rough, 0.0, 1.0, 1e-15, 8, 5), QuadratureFailure);
  }
}
