#pragma once

#include "hybavg/averaging.hpp"
#include "hybavg/errors.hpp"
#include "hybavg/settings.hpp"
#include "hybavg/system.hpp"
#include "hybavg/types.hpp"

#include <functional>
#include <vector>

namespace hybavg {

using SlowMap = std::function<Vector(const Vector&)>;

/// Newton stopped at a point where D(P - id) is numerically singular, either
/// in absolute terms (condition number above cond_max) or relative to the
/// time-scale parameter (smallest singular value below
/// hyperbolicity_floor * eps).
class SingularJacobian : public NumericalError {
 public:
  SingularJacobian(const std::string& what, Vector point, double residual, double condition)
      : NumericalError(what), point_(std::move(point)), residual_(residual),
        condition_(condition) {}
  const Vector& point() const noexcept { return point_; }
  double residual() const noexcept { return residual_; }
  double condition() const noexcept { return condition_; }

 private:
  Vector point_;
  double residual_;
  double condition_;
};

/// Registration-time conditions on the averaged field and the reset
/// expansion. Never throws; numerical failures become failed items.
std::vector<CheckItem> assess_averageability(const HybridSystem& sys, const Settings& s);

/// One stride from the post-reset section: flow (0, x2) to the guard, reset,
/// project to the slow coordinates.
Vector full_poincare_map(const HybridSystem& sys, const Vector& x2, double eps,
                         const Settings& s = {});

/// Rbar o pi2 o Phi(x1*, (0, x2)): flow to the constant-flow-time section,
/// then the effective reset.
Vector constant_flow_time_map(const HybridSystem& sys, const Vector& x2, double eps,
                              const Settings& s = {});

/// Damped Newton on P(x) - x with a central-difference Jacobian. Pass the
/// time-scale parameter as `eps` to enable the eps-relative singularity test.
Vector find_fixed_point(const SlowMap& map, const Vector& guess, const Settings& s = {},
                        double eps = 0.0);

struct FixedPointResult {
  Vector point;
  double residual = 0.0;
  bool non_isolated = false;
};

/// find_fixed_point on the full map; a SingularJacobian whose point meets
/// newton_tol is accepted and marked non-isolated.
FixedPointResult locate_fixed_point(const HybridSystem& sys, double eps, const Vector& guess,
                                    const Settings& s = {});

struct PoincareJacobian {
  Matrix direct;      // central differences of full_poincare_map
  Matrix chain_rule;  // D Rbar(Q(x2)) * D Q(x2)
  double disagreement = 0.0;
};

PoincareJacobian full_poincare_jacobian(const HybridSystem& sys, const Vector& x2_fixed,
                                        double eps, const Settings& s = {});

StabilityCertificate certify_orthogonal_reset(const HybridSystem& sys,
                                              const TaylorResetExpansion& expansion,
                                              const Settings& s = {});

/// rank(S0 - I) == n - #{eigenvalues within jordan_tol of 1}.
bool unity_jordan_blocks_diagonal(const Matrix& S0, double jordan_tol, int* unity_count = nullptr);

/// Sweeps eps in increasing order with warm-started fixed points. Per-point
/// failures are recorded in the report rather than thrown.
SweepReport epsilon_sweep(const HybridSystem& sys, const std::vector<double>& eps_values,
                          const Settings& s = {}, const TaylorResetExpansion* expansion = nullptr);

/// DP(eps) - DP(0) = C1 eps + C2 eps^2 solved exactly from two eps values,
/// with DP taken at the fixed point of each map.
struct OrderEpsFit {
  double eps_a = 0.0;
  double eps_b = 0.0;
  Matrix DP0, DPa, DPb;
  Matrix C1, C2;
  double slope = 0.0;  // ||C1||
};

OrderEpsFit fit_order_eps(const HybridSystem& sys, double eps_a, double eps_b,
                          const Settings& s = {});

struct PropertySuiteOptions {
  std::vector<double> eps_values{0.01, 0.1, 0.5};
  int samples = 10;
  double jacobian_rtol = 1e-5;
  double equivalence_tol = 1e-7;
  std::vector<double> equivalence_eps{0.1, 0.5};
  int equivalence_samples = 20;
};

/// Registration report plus the analytic-vs-numeric Jacobian checks, event
/// consistency, the flow group property and the Poincare map equivalence.
RegistrationReport run_property_suite(const HybridSystem& sys, const Settings& s = {},
                                      const PropertySuiteOptions& opt = {});

}  // namespace hybavg
