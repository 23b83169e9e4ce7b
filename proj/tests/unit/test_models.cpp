#include "hybavg/averaging.hpp"
#include "hybavg/errors.hpp"
#include "hybavg/models.hpp"
#include "hybavg/stability.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace hybavg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

Vector v1(double x) { return Vector::Constant(1, x); }

HopperParams at_eps(double eps) {
  HopperParams p;
  p.eps = eps;
  return p;
}

}  // namespace

TEST_CASE("hopper parameter validation") {
  HopperParams p;
  CHECK_NOTHROW(p.validate());
  p.beta = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p = {};
  p.k = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p = {};
  p.eps = 50.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p.eps = 0.0;
  CHECK_NOTHROW(p.validate());
  p.omega = std::nan("");
  CHECK_THROWS_AS(p.validate(), InvalidParams);
}

TEST_CASE("hopper oracle values") {
  const HopperOracles o = hopper_oracles({});
  CHECK(o.a_star == 0.04);
  CHECK_THAT(o.Dfbar, WithinRel(-0.1, 1e-15));
  CHECK_THAT(o.S1, WithinRel(-0.01962, 1e-12));
  CHECK_THAT(o.W, WithinAbs(-0.3337792654, 1e-9));
  CHECK_THAT(o.fbar(0.08), WithinAbs(-0.004, 1e-15));
  CHECK_THAT(o.averaged_a(0.05, 2.0, 0.0), WithinAbs(0.05, 1e-15));
  CHECK_THAT(o.averaged_a(0.05, 2.0, 100.0), WithinAbs(0.04, 1e-10));
}

TEST_CASE("hopper anchor lies on the guard and is fixed by the reset") {
  const HybridSystemDef d = make_vertical_hopper({});
  for (double eps : {0.0, 0.5, 2.0, 10.0}) {
    CHECK_THAT(d.guard(d.anchor, eps), WithinAbs(0.0, 1e-15));
    const StateX r = d.reset(d.anchor, eps);
    CHECK(r.x1 == 0.0);
    CHECK_THAT(r.x2(0), WithinAbs(0.04, 1e-15));
  }
}

TEST_CASE("hopper reset rejects an imaginary touchdown amplitude") {
  const HybridSystemDef d = make_vertical_hopper({});
  CHECK_THROWS_AS(d.reset(StateX{kPi / 2.0, v1(1e-6)}, 2.0), NonPhysical);
}

TEST_CASE("hopper averaged field matches the closed form") {
  const SystemHandle h = register_system(make_vertical_hopper({}));
  const HopperOracles o = hopper_oracles({});
  for (double a : {0.02, 0.04, 0.08, 0.2})
    CHECK_THAT(averaged_field(*h, v1(a))(0), WithinAbs(o.fbar(a), 1e-12));
  CHECK_THAT(averaged_field_jacobian(*h, v1(0.04))(0, 0), WithinAbs(o.Dfbar, 1e-7));
}

TEST_CASE("phase-energy coordinates round-trip") {
  const HopperParams p;
  for (double th : {-1.2, 0.0, 0.7, kPi / 2.0, 2.5, kPi, 4.0}) {
    for (double a : {0.01, 0.04, 0.3}) {
      const auto [z, zd] = hopper_to_physical(p, th, a);
      const auto [th2, a2] = hopper_to_phase_energy(p, z, zd);
      CHECK_THAT(th2, WithinAbs(th, 1e-12));
      CHECK_THAT(a2, WithinRel(a, 1e-12));
    }
  }
}

TEST_CASE("physical hopper without feedback repeats the same stride") {
  const HopperParams p = at_eps(0.0);
  const PhysicalTrajectory tr = simulate_physical_hopper(p, 0.05, 4);
  REQUIRE(tr.touchdown_a.size() == 5);
  for (double d : tr.stance_durations) CHECK_THAT(d, WithinAbs(kPi / p.omega, 1e-9));
  for (double a : tr.touchdown_a) CHECK_THAT(a, WithinAbs(0.05, 1e-12));
  for (std::size_t j = 1; j < tr.liftoff_times.size(); ++j) {
    CHECK_THAT(tr.liftoff_times[j] - tr.liftoff_times[j - 1],
               WithinAbs(tr.liftoff_times[1] - tr.liftoff_times[0], 1e-9));
  }
}

TEST_CASE("physical hopper strides obey the phase-energy model") {
  const HopperParams p;
  const HybridSystemDef d = make_vertical_hopper(p);
  const PhysicalTrajectory tr = simulate_physical_hopper(p, 0.05, 6);
  for (std::size_t j = 0; j < tr.liftoff_z.size(); ++j) {
    const auto [th, a] = hopper_to_phase_energy(p, tr.liftoff_z[j], tr.liftoff_zdot[j]);
    const StateX lift{th, v1(a)};
    INFO("stride " << j);
    CHECK_THAT(d.guard(lift, p.eps), WithinAbs(0.0, 1e-9));
    CHECK(th > kPi / 2.0);
    CHECK(th < 3.0 * kPi / 2.0);
    CHECK_THAT(tr.touchdown_a[j + 1], WithinAbs(d.reset(lift, p.eps).x2(0), 1e-8));
  }
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (tr.mode[i] != HopperMode::flight) continue;
    // ballistic energy is conserved in flight
    const double e = 0.5 * tr.zdot[i] * tr.zdot[i] + p.g * tr.z[i];
    const double a = tr.a[i];
    CHECK_THAT(e, WithinRel(0.5 * a * a * p.omega * p.omega + p.g * p.z0, 1e-10));
  }
  for (std::size_t j = 1; j < tr.touchdown_times.size(); ++j) {
    const auto it = std::find(tr.times.begin(), tr.times.end(), tr.touchdown_times[j]);
    REQUIRE(it != tr.times.end());
    CHECK(tr.z[it - tr.times.begin()] == p.z0);
  }
}

TEST_CASE("touchdown amplitudes converge to k / beta") {
  const PhysicalTrajectory tr = simulate_physical_hopper({}, 0.06, 60);
  CHECK_THAT(tr.touchdown_a.back(), WithinAbs(0.04, 1e-6));
  for (std::size_t j = 1; j < tr.touchdown_a.size(); ++j)
    CHECK(std::abs(tr.touchdown_a[j] - 0.04) <= std::abs(tr.touchdown_a[j - 1] - 0.04) + 1e-13);
}

TEST_CASE("hybrid and averaged amplitude stay close") {
  const ResidualSeries r = residual_vs_averaged({}, 0.05, 20);
  CHECK(r.max_abs_residual < 0.004);
  CHECK(r.a_averaged_dense.size() == r.trajectory.times.size());
  CHECK(r.residual.front() == 0.0);

  const ResidualSeries flat = residual_vs_averaged(at_eps(0.0), 0.05, 5);
  CHECK(flat.max_abs_residual <= 1e-12);
}

TEST_CASE("simulation input validation") {
  CHECK_THROWS_AS(simulate_physical_hopper({}, -0.01, 3), InvalidArgument);
  CHECK_THROWS_AS(simulate_physical_hopper({}, 0.05, 0), InvalidArgument);
}

TEST_CASE("counterexample averaged field and certificate inputs") {
  const SystemHandle h = register_system(make_nonhyperbolic_example(1.0));
  CHECK_THAT(averaged_field(*h, v1(0.3))(0), WithinAbs(-0.3, 1e-12));
  const TaylorResetExpansion e = extract_taylor_expansion(*h);
  CHECK_THAT(e.S0(0, 0), WithinAbs(1.0, 1e-10));
  CHECK_THAT(e.S1(0, 0), WithinAbs(1.0, 1e-6));
  CHECK_THROWS_AS(make_nonhyperbolic_example(0.0), InvalidParams);
}

TEST_CASE("classical model fixed-point drift is first order") {
  const SystemHandle h = register_system(make_classical_example());
  const double d1 = locate_fixed_point(*h, 0.01, v1(0.0)).point.norm();
  const double d2 = locate_fixed_point(*h, 0.02, v1(0.0)).point.norm();
  CHECK(d1 > 1e-6);
  CHECK_THAT(d2 / d1, WithinAbs(2.0, 0.3));
}

TEST_CASE("model catalog construction") {
  const BuiltModel m = build_model("hopper", {{"beta", 8.0}});
  CHECK(m.params.at("beta") == 8.0);
  CHECK(m.params.at("k") == 0.4);
  CHECK(m.eps == 2.0);
  CHECK_THAT(m.system->x2_star()(0), WithinAbs(0.05, 1e-15));

  CHECK_THROWS_AS(build_model("pogo", {}), InvalidArgument);
  CHECK_THROWS_AS(build_model("hopper", {{"mass", 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(build_model("hopper", {{"eps", 60.0}}), InvalidParams);
  CHECK_THROWS_AS(build_model("classical", {{"eps", 1.0}}), InvalidParams);
  CHECK_THROWS_AS(build_model("nonhyperbolic", {{"x1_star", -1.0}}), InvalidParams);

  Registry& r = default_registry();
  for (const auto& info : model_catalog()) CHECK(r.contains(info.name));
}
