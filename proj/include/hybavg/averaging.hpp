#pragma once

#include "hybavg/errors.hpp"
#include "hybavg/settings.hpp"
#include "hybavg/system.hpp"
#include "hybavg/types.hpp"

#include <vector>

namespace hybavg {

/// f_bar(x2) = (1/x1*) * integral_0^{x1*} F2((s, x2), eps = 0) ds, by adaptive
/// Simpson quadrature.
Vector averaged_field(const HybridSystem& sys, const Vector& x2, const Settings& s = {});

/// Central differences of averaged_field.
Matrix averaged_field_jacobian(const HybridSystem& sys, const Vector& x2, const Settings& s = {});

/// Rbar(x2) = pi2 R(Phi(tau(x1*, x2), (x1*, x2))): the reset seen from the
/// constant-flow-time section {x1*} x X2. tau may be negative.
Vector effective_reset(const HybridSystem& sys, const Vector& x2, double eps,
                       const Settings& s = {});

/// D Rbar at x2* assembled from DR, D(gamma) and F at the crossing:
///   pi2 (D2 R - (DR F)(D2 gamma) / (D gamma . F)).
Matrix effective_reset_jacobian_analytic(const HybridSystem& sys, double eps,
                                         const Settings& s = {});

/// Same assembly at an arbitrary slow state; the flow to the guard enters
/// through the variational flow Jacobian.
Matrix effective_reset_jacobian_analytic(const HybridSystem& sys, const Vector& x2, double eps,
                                         const Settings& s = {});

/// Central-difference Jacobian of effective_reset.
Matrix effective_reset_jacobian_fd(const HybridSystem& sys, const Vector& x2, double eps,
                                   const Settings& s = {});

/// Eight log-spaced values in [1e-3, 1e-1] clipped to the validity range.
std::vector<double> default_taylor_grid(const HybridSystem& sys);

/// Raised when the quadratic-in-eps model does not explain the Jacobians.
/// The partially filled expansion is still available.
class PoorFit : public NumericalError {
 public:
  PoorFit(const std::string& what, TaylorResetExpansion e)
      : NumericalError(what), expansion_(std::move(e)) {}
  const TaylorResetExpansion& expansion() const noexcept { return expansion_; }

 private:
  TaylorResetExpansion expansion_;
};

/// Fits D Rbar(x2*; eps) = S0 + eps S1 + eps^2 S2 by least squares over
/// `eps_grid`, reports the order of |D Rbar - S0 - eps S1| and the spread of
/// the eps -> 0 intercept across `x2_samples`. Empty arguments select the
/// defaults.
TaylorResetExpansion extract_taylor_expansion(const HybridSystem& sys,
                                              std::vector<double> eps_grid = {},
                                              std::vector<Vector> x2_samples = {},
                                              const Settings& s = {});

struct AveragedJacobian {
  Matrix product;      // (S0 + eps S1)(I + eps x1* Df_bar(x2*))
  Matrix first_order;  // S0 + eps (S1 + x1* S0 Df_bar(x2*))
};

AveragedJacobian averaged_poincare_jacobian(const HybridSystem& sys, double eps,
                                            const TaylorResetExpansion& expansion,
                                            const Settings& s = {});

/// Qbar: flow of x2' = eps f_bar(x2) over the phase span `span`.
Vector averaged_flow(const HybridSystem& sys, const Vector& x2, double eps, double span,
                     const Settings& s = {});

/// Pbar = Rbar o Qbar with span x1*.
Vector averaged_poincare_map(const HybridSystem& sys, const Vector& x2, double eps,
                             const Settings& s = {});

}  // namespace hybavg
