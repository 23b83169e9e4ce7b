#include "hybavg/errors.hpp"
#include "hybavg/ode.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace hybavg;
using Catch::Matchers::WithinAbs;

namespace {

// Harmonic oscillator y'' = -y as a first-order system.
Vector oscillator(const Vector& y) {
  Vector d(2);
  d << y(1), -y(0);
  return d;
}

Vector unit_x() {
  Vector y(2);
  y << 1.0, 0.0;
  return y;
}

}  // namespace

TEST_CASE("propagation matches the closed-form oscillator") {
  const Vector y = ode::propagate(oscillator, unit_x(), 10.0, ode::Options{});
  CHECK_THAT(y(0), WithinAbs(std::cos(10.0), 1e-10));
  CHECK_THAT(y(1), WithinAbs(-std::sin(10.0), 1e-10));
}

TEST_CASE("negative durations integrate backwards") {
  const Vector y = ode::propagate(oscillator, unit_x(), -2.0, ode::Options{});
  CHECK_THAT(y(0), WithinAbs(std::cos(2.0), 1e-10));
  CHECK_THAT(y(1), WithinAbs(std::sin(2.0), 1e-10));
}

TEST_CASE("single Dormand-Prince step is fifth order") {
  const Vector y0 = unit_x();
  auto err_at = [&](double h) { return std::abs(ode::dopri_step(oscillator, y0, h)(0) - std::cos(h)); };
  const double ratio = err_at(0.2) / err_at(0.1);
  // local error O(h^6)
  CHECK(ratio > 50.0);
  CHECK(ratio < 80.0);
}

TEST_CASE("event location on the oscillator") {
  ode::EventOptions ev;
  ev.direction = ode::EventDirection::falling;
  const auto hit = ode::propagate_to_event(
      oscillator, unit_x(), 10.0, [](const Vector& y) { return y(0); }, ev, ode::Options{});
  REQUIRE(hit);
  CHECK_THAT(hit->t, WithinAbs(std::acos(0.0), 1e-12));

  SECTION("direction filter skips the first zero") {
    ev.direction = ode::EventDirection::rising;
    const auto rise = ode::propagate_to_event(
        oscillator, unit_x(), 10.0, [](const Vector& y) { return y(0); }, ev, ode::Options{});
    REQUIRE(rise);
    CHECK_THAT(rise->t, WithinAbs(3.0 * std::acos(0.0), 1e-12));
  }
  SECTION("backward search reports a negative time") {
    ev.direction = ode::EventDirection::either;
    const auto back = ode::propagate_to_event(
        oscillator, unit_x(), -10.0, [](const Vector& y) { return y(0); }, ev, ode::Options{});
    REQUIRE(back);
    CHECK_THAT(back->t, WithinAbs(-std::acos(0.0), 1e-12));
  }
  SECTION("no crossing within the horizon") {
    CHECK_FALSE(ode::propagate_to_event(
        oscillator, unit_x(), 1.0, [](const Vector& y) { return y(0); }, ev, ode::Options{}));
  }
}

TEST_CASE("domain violations raise StateEscape") {
  const ode::Rhs grow = [](const Vector& y) { return y; };
  CHECK_THROWS_AS(ode::propagate(grow, Vector::Ones(1), 5.0, ode::Options{}, {},
                                 [](const Vector& y) { return y(0) < 10.0; }),
                  StateEscape);
}

TEST_CASE("step budget raises StepFailure") {
  ode::Options o;
  o.max_steps = 3;
  CHECK_THROWS_AS(ode::propagate(oscillator, unit_x(), 100.0, o), StepFailure);
}
