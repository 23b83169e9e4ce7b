#pragma once

#include "hybavg/settings.hpp"
#include "hybavg/system.hpp"
#include "hybavg/types.hpp"

#include <vector>

namespace hybavg {

/// Sampled solution of the continuous dynamics (guard ignored).
struct Trajectory {
  std::vector<double> times;
  std::vector<StateX> states;
  double eps = 0.0;
};

/// Pure flow from t = 0 to t_final >= 0, sampled at accepted steps.
Trajectory integrate(const HybridSystem& sys, const StateX& x0, double eps, double t_final,
                     const Settings& s = {});

/// Flow for a signed time t (negative t integrates the reversed field).
StateX propagate(const HybridSystem& sys, const StateX& x0, double eps, double t,
                 const Settings& s = {});

enum class EventSearch {
  automatic,  // direction from the linearized time-to-event estimate
  forward,
  backward,
};

/// Flows x0 to the guard. Returns tau = 0 when x0 is already on the guard.
/// Throws NoCrossing when no crossing occurs within the event horizon and
/// Tangency when |D(gamma).F| < tol_transversal at the crossing.
EventCrossing flow_to_guard(const HybridSystem& sys, const StateX& x0, double eps,
                            const Settings& s = {}, EventSearch search = EventSearch::automatic);

/// Flows x0 forward until the phase reaches `x1_target` (the constant flow
/// time section {x1_target} x X2).
EventCrossing flow_to_section(const HybridSystem& sys, const StateX& x0, double eps,
                              double x1_target, const Settings& s = {});

/// D(tau) = -D(gamma) / (D(gamma) . F) at a point on the guard.
Vector time_to_event_gradient(const HybridSystem& sys, const StateX& x, double eps,
                              const Settings& s = {});

enum class JacobianMethod { variational, finite_difference };

/// Spatial Jacobian D2 Phi(t, x0), (n+1) x (n+1).
Matrix flow_jacobian(const HybridSystem& sys, const StateX& x0, double eps, double t,
                     JacobianMethod method, const Settings& s = {});

/// Several strides of flow-and-reset from (0, x2_init), sampled densely.
struct HybridRun {
  std::vector<double> times;
  std::vector<StateX> states;
  std::vector<int> stride;          // stride index of each sample
  std::vector<Vector> section;      // slow state at the start of each stride (strides+1 entries)
  std::vector<double> stride_times; // real time at the start of each stride
};

HybridRun simulate_hybrid(const HybridSystem& sys, const Vector& x2_init, double eps, int strides,
                          const Settings& s = {});

}  // namespace hybavg
