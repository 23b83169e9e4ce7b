#include "hybavg/errors.hpp"
#include "hybavg/models.hpp"
#include "hybavg/system.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>

using namespace hybavg;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

// Constant-flow-time system with a scaled identity reset.
HybridSystemDef scaled_reset(double phase_after_reset, double gain) {
  HybridSystemDef d;
  d.name = "scaled";
  d.n = 1;
  d.x1_bounds = {-1.0, 2.0};
  d.x2_lower = v1(-kInf);
  d.x2_upper = v1(kInf);
  d.perturbation = [](const StateX& x, double) {
    Vector f(2);
    f << 0.0, -x.x2(0);
    return f;
  };
  d.guard = constant_flow_time_guard(1.0);
  d.constant_flow_time = true;
  d.reset = [phase_after_reset, gain](const StateX& x, double) {
    return StateX{phase_after_reset, v1(gain * x.x2(0))};
  };
  d.anchor = StateX{1.0, v1(0.0)};
  return d;
}

bool mentions(const InvalidSystem& e, const std::string& id) {
  return std::any_of(e.violations().begin(), e.violations().end(),
                     [&](const std::string& v) { return v.find(id) != std::string::npos; });
}

}  // namespace

TEST_CASE("hopper registers with every structural check passing") {
  const SystemHandle h = register_system(make_vertical_hopper({}));
  for (const char* id : {"phase_interval", "anchor_in_domain", "field_form",
                         "anchor_on_guard", "reset_phase_zero", "reset_fixes_anchor",
                         "averaged_equilibrium", "W_invertible"}) {
    const CheckItem* item = h->report().find(id);
    REQUIRE(item != nullptr);
    CHECK(item->passed);
  }
  CHECK(h->report().all_passed());
}

TEST_CASE("reset with nonzero phase is rejected") {
  try {
    register_system(scaled_reset(0.5, 1.0));
    FAIL("expected InvalidSystem");
  } catch (const InvalidSystem& e) {
    CHECK(mentions(e, "reset_phase_zero"));
  }
}

TEST_CASE("anchor off the guard is rejected") {
  HybridSystemDef d = scaled_reset(0.0, 1.0);
  d.anchor.x1 = 0.5;
  try {
    register_system(d);
    FAIL("expected InvalidSystem");
  } catch (const InvalidSystem& e) {
    CHECK(mentions(e, "anchor_on_guard"));
  }
}

TEST_CASE("reset that moves the anchor is rejected") {
  HybridSystemDef d = scaled_reset(0.0, 1.0);
  d.reset = [](const StateX& x, double) { return StateX{0.0, v1(x.x2(0) + 0.1)}; };
  CHECK_THROWS_AS(register_system(d), InvalidSystem);
}

TEST_CASE("counterexample registers but fails the order-eps invertibility check") {
  const SystemHandle h = register_system(make_nonhyperbolic_example(1.0));
  for (const char* id : {"phase_interval", "anchor_on_guard", "reset_phase_zero",
                         "reset_fixes_anchor"}) {
    CHECK(h->report().find(id)->passed);
  }
  const CheckItem* w = h->report().find("W_invertible");
  REQUIRE(w != nullptr);
  CHECK_FALSE(w->passed);
  CHECK_FALSE(h->report().all_passed());
}

TEST_CASE("field assembles the phase rate and perturbation") {
  const SystemHandle h = register_system(make_vertical_hopper({}));
  const StateX x{0.3, v1(0.05)};
  const Vector F = h->field(x, 0.7);
  const Vector p = h->perturbation(x, 0.7);
  CHECK(F(0) == Catch::Approx(50.0 * (1.0 + 0.7 * p(0))).epsilon(1e-15));
  CHECK(F(1) == Catch::Approx(50.0 * 0.7 * p(1)).epsilon(1e-15));
}

TEST_CASE("eps and state preconditions") {
  const SystemHandle h = register_system(make_vertical_hopper({}));
  CHECK_THROWS_AS(h->require_eps(50.0), InvalidArgument);
  CHECK_THROWS_AS(h->require_eps(-0.1), InvalidArgument);
  CHECK_NOTHROW(h->require_eps(0.0));
  CHECK_THROWS_AS(h->require_state(StateX{0.0, v1(-0.01)}), InvalidArgument);
  CHECK_THROWS_AS(h->require_state(StateX{7.0, v1(0.04)}), InvalidArgument);
}

TEST_CASE("registry lookup") {
  Registry r;
  r.add(make_nonhyperbolic_example(2.0));
  CHECK(r.contains("nonhyperbolic"));
  CHECK(r.get("nonhyperbolic")->x1_star() == 2.0);
  CHECK_THROWS_AS(r.get("missing"), InvalidArgument);
  CHECK(default_registry().names() ==
        std::vector<std::string>{"classical", "hopper", "nonhyperbolic"});
}

TEST_CASE("ball samples stay within the radius and include the center") {
  Vector c(2);
  c << 1.0, -2.0;
  const auto pts = ball_samples(c, 0.3, 7);
  REQUIRE(pts.size() >= 7);
  CHECK(pts.front() == c);
  for (const auto& p : pts) CHECK((p - c).norm() <= 0.3 + 1e-15);
}
