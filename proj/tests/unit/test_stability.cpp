#include "hybavg/errors.hpp"
#include "hybavg/models.hpp"
#include "hybavg/numerics.hpp"
#include "hybavg/stability.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace hybavg;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

Vector v1(double x) { return Vector::Constant(1, x); }

const SystemHandle& hopper() {
  static const SystemHandle h = register_system(make_vertical_hopper({}));
  return h;
}
const SystemHandle& counterexample() {
  static const SystemHandle h = register_system(make_nonhyperbolic_example(1.0));
  return h;
}
const SystemHandle& classical() {
  static const SystemHandle h = register_system(make_classical_example());
  return h;
}

const SweepReport& hopper_sweep() {
  static const SweepReport r = epsilon_sweep(*hopper(), numerics::logspace(0.01, 0.5, 8));
  return r;
}

}  // namespace

TEST_CASE("full Poincare map examples") {
  CHECK_THAT(full_poincare_map(*hopper(), v1(0.04), 2.0)(0), WithinAbs(0.04, 2e-4));
  CHECK(full_poincare_map(*classical(), v1(0.0), 0.0)(0) == 0.0);
  CHECK_THAT(full_poincare_map(*hopper(), v1(0.05), 0.5)(0),
             WithinAbs(constant_flow_time_map(*hopper(), v1(0.05), 0.5)(0), 1e-7));
}

TEST_CASE("counterexample return map in closed form") {
  // x2 e^{-eps x1*} followed by (1 + eps x1*)
  const double eps = 0.2, x = 0.3;
  CHECK_THAT(full_poincare_map(*counterexample(), v1(x), eps)(0),
             WithinAbs((1.0 + eps) * std::exp(-eps) * x, 1e-12));
}

TEST_CASE("Newton on an affine map") {
  const SlowMap P = [](const Vector& x) { return Vector(0.5 * x + Vector::Ones(x.size())); };
  const Vector x = find_fixed_point(P, Vector::Zero(2));
  CHECK((x - 2.0 * Vector::Ones(2)).norm() <= 1e-10);
}

TEST_CASE("Newton reports a singular D(P - id)") {
  const SlowMap shift = [](const Vector& x) { return Vector(x + Vector::Ones(x.size())); };
  CHECK_THROWS_AS(find_fixed_point(shift, Vector::Zero(1)), SingularJacobian);
}

TEST_CASE("averaged hopper map has the anchor as fixed point") {
  for (double eps : {0.05, 0.5, 2.0}) {
    const SlowMap P = [eps](const Vector& x) { return averaged_poincare_map(*hopper(), x, eps); };
    // residual tolerance maps to a state error of newton_tol / (eps |W|)
    const double tol = 10.0 * Settings{}.newton_tol / (eps * 0.33);
    CHECK_THAT(find_fixed_point(P, v1(0.045), Settings{}, eps)(0), WithinAbs(0.04, tol));
  }
}

TEST_CASE("counterexample fixed point is not hyperbolic at order eps") {
  const double eps = 0.01;
  const SlowMap P = [eps](const Vector& x) { return full_poincare_map(*counterexample(), x, eps); };
  bool flagged = false;
  try {
    find_fixed_point(P, v1(0.05), Settings{}, eps);
  } catch (const SingularJacobian& e) {
    flagged = true;
    CHECK(e.residual() <= Settings{}.newton_tol);
  } catch (const NoConvergence&) {
    flagged = true;
  }
  CHECK(flagged);
}

TEST_CASE("full and averaged return-map Jacobians") {
  const TaylorResetExpansion e = extract_taylor_expansion(*hopper());
  const double eps = 0.05;
  const FixedPointResult fp = locate_fixed_point(*hopper(), eps, v1(0.04));
  const PoincareJacobian J = full_poincare_jacobian(*hopper(), fp.point, eps);
  CHECK(std::abs(J.direct(0, 0) - averaged_poincare_jacobian(*hopper(), eps, e).product(0, 0)) <=
        3e-3);
  CHECK(J.disagreement <= 1e-5);

  SECTION("eps = 0 gives S0") {
    const PoincareJacobian J0 = full_poincare_jacobian(*hopper(), v1(0.04), 0.0);
    CHECK_THAT(J0.direct(0, 0), WithinAbs(1.0, 1e-8));
  }
}

TEST_CASE("chain-rule Jacobian agrees with direct differences off the fixed point") {
  for (double a : {0.035, 0.047}) {
    const PoincareJacobian J = full_poincare_jacobian(*hopper(), v1(a), 0.3);
    CHECK(J.disagreement <= 1e-5 * std::abs(J.direct(0, 0)));
  }
}

TEST_CASE("orthogonal-reset certificate") {
  SECTION("hopper is stable") {
    const StabilityCertificate c =
        certify_orthogonal_reset(*hopper(), extract_taylor_expansion(*hopper()));
    CHECK_THAT(c.W(0, 0), WithinAbs(-0.333779, 1e-3));
    CHECK(c.verdict == Verdict::stable);
    CHECK_FALSE(c.W_forms_disagree);
    CHECK(c.jordan_ok);
    CHECK(c.unity_eigenvalue_count == 1);
  }
  SECTION("counterexample has a degenerate W") {
    const StabilityCertificate c =
        certify_orthogonal_reset(*counterexample(), extract_taylor_expansion(*counterexample()));
    CHECK_THAT(c.W(0, 0), WithinAbs(0.0, 1e-6));
    CHECK(c.verdict == Verdict::degenerate_W);
  }
  SECTION("S0 = 2 is not orthogonal") {
    TaylorResetExpansion e;
    e.S0 = Matrix::Constant(1, 1, 2.0);
    e.S1 = Matrix::Zero(1, 1);
    const StabilityCertificate c = certify_orthogonal_reset(*counterexample(), e);
    CHECK_THAT(c.S0_orthogonality_defect, WithinAbs(3.0, 1e-14));
    CHECK(c.verdict == Verdict::not_orthogonal);
  }
  SECTION("forms disagree when S0 is a nontrivial rotation") {
    TaylorResetExpansion e;
    e.S0 = Matrix::Constant(1, 1, -1.0);
    e.S1 = Matrix::Constant(1, 1, 0.5);
    const StabilityCertificate c = certify_orthogonal_reset(*classical(), e);
    CHECK(c.W_forms_disagree);
    CHECK(c.W_form_used == "S0*S1 + x1*Df_bar");
  }
}

TEST_CASE("stable verdict requires orthogonality and a negative symmetric part") {
  for (const SystemHandle* h : {&hopper(), &counterexample(), &classical()}) {
    const StabilityCertificate c =
        certify_orthogonal_reset(**h, extract_taylor_expansion(**h));
    if (c.verdict == Verdict::stable) {
      CHECK(c.S0_orthogonality_defect <= Settings{}.tol_orth);
      CHECK(c.symmetric_part_eigs.maxCoeff() < -Settings{}.margin);
    }
  }
}

TEST_CASE("unity eigenvalue Jordan check") {
  Matrix block(2, 2);
  block << 1.0, 1.0, 0.0, 1.0;
  CHECK_FALSE(unity_jordan_blocks_diagonal(block, 1e-6));
  int count = 0;
  CHECK(unity_jordan_blocks_diagonal(Matrix::Identity(3, 3), 1e-6, &count));
  CHECK(count == 3);
  Matrix rot(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  CHECK(unity_jordan_blocks_diagonal(rot, 1e-6, &count));
  CHECK(count == 0);
}

TEST_CASE("hopper sweep has second-order gap and first-order drift") {
  const SweepReport& r = hopper_sweep();
  REQUIRE(r.points.size() == 8);
  for (const auto& p : r.points) {
    REQUIRE(p.ok);
    CHECK(p.fp_residual <= Settings{}.newton_tol);
  }
  CHECK(r.fitted_gap_order >= 1.75);
  CHECK(r.fitted_drift_order >= 0.75);
  CHECK(r.hyperbolic_at_order_eps);
}

TEST_CASE("certificate soundness over the swept range") {
  const SweepReport& r = hopper_sweep();
  CHECK(r.stable_below_eps == r.eps_values.back());
  for (const auto& p : r.points)
    if (p.eps <= r.stable_below_eps) CHECK(p.spectral_radius < 1.0);
}

TEST_CASE("continuation branch is continuous") {
  const SweepReport r = epsilon_sweep(*classical(), numerics::logspace(0.01, 0.5, 8));
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    const double step = (r.points[i].fixed_point - r.points[i - 1].fixed_point).norm();
    CHECK(step <= r.continuation_constant * (r.points[i].eps - r.points[i - 1].eps) * (1 + 1e-12));
  }
  CHECK(r.continuation_constant < 2.0);
  CHECK(r.fitted_gap_order >= 1.75);
  CHECK(r.fitted_drift_order >= 0.75);
  CHECK_FALSE(r.drift_exact);
}

TEST_CASE("contraction inequality of the certificate") {
  const TaylorResetExpansion e = extract_taylor_expansion(*hopper());
  const StabilityCertificate c = certify_orthogonal_reset(*hopper(), e);
  const double lam = c.symmetric_part_eigs.maxCoeff();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (double eps : hopper_sweep().eps_values) {
    const Matrix DP = averaged_poincare_jacobian(*hopper(), eps, e).product;
    for (int i = 0; i < 20; ++i) {
      Vector v = Vector::Constant(1, gauss(rng));
      v.normalize();
      CHECK((DP * v).squaredNorm() - 1.0 <= 0.5 * eps * lam);
    }
  }
}

TEST_CASE("counterexample sweep flags loss of hyperbolicity") {
  const SweepReport r = epsilon_sweep(*counterexample(), numerics::logspace(0.01, 0.5, 8));
  CHECK_FALSE(r.hyperbolic_at_order_eps);
  CHECK(r.fitted_gap_order >= 1.75);
  CHECK(r.points.front().non_isolated);
}

TEST_CASE("sweep input validation") {
  CHECK_THROWS_AS(epsilon_sweep(*hopper(), {0.01, 0.02, 0.04}), InvalidArgument);
  CHECK_THROWS_AS(epsilon_sweep(*hopper(), {0.01, 0.02, 0.03, 0.04, 0.05}), InvalidArgument);
  CHECK_THROWS_AS(epsilon_sweep(*hopper(), numerics::logspace(1.0, 60.0, 5)), InvalidArgument);
}

TEST_CASE("order-eps term of the counterexample linearization vanishes") {
  const OrderEpsFit f = fit_order_eps(*counterexample(), 0.01, 0.02);
  CHECK(f.slope < 1e-3);
  // (1 + eps) e^{-eps} = 1 - eps^2 / 2 + O(eps^3)
  CHECK_THAT(f.C2(0, 0), WithinAbs(-0.5, 0.02));
  const OrderEpsFit h = fit_order_eps(*hopper(), 0.01, 0.02);
  CHECK_THAT(h.C1(0, 0), WithinAbs(hopper_oracles({}).W, 1e-3));
}

TEST_CASE("property suite passes on every catalog model") {
  for (const SystemHandle* h : {&hopper(), &counterexample(), &classical()}) {
    const RegistrationReport r = run_property_suite(**h);
    for (const char* id : {"jac.reset", "jac.tau_gradient", "jac.flow", "flow.event_consistency",
                           "flow.group_property", "map.equivalence"}) {
      const CheckItem* item = r.find(id);
      REQUIRE(item != nullptr);
      INFO((*h)->name() << " " << id << " " << item->value << " " << item->detail);
      CHECK(item->passed);
    }
  }
}
