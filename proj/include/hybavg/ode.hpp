#pragma once

#include "hybavg/settings.hpp"
#include "hybavg/types.hpp"

#include <functional>
#include <optional>

namespace hybavg::ode {

/// Autonomous right-hand side y' = f(y).
using Rhs = std::function<Vector(const Vector&)>;
/// Called with (signed time, state) at the start and after accepted steps.
using Observer = std::function<void(double, const Vector&)>;
/// Returns false when the state has left the admissible domain.
using DomainCheck = std::function<bool(const Vector&)>;
using EventFn = std::function<double(const Vector&)>;

/// Crossing direction measured in forward time.
enum class EventDirection { rising, falling, either };

struct Options {
  double rtol = 1e-12;
  double atol = 1e-14;
  double h_min = 1e-15;
  long max_steps = 2'000'000;
};

Options options_from(const Settings& s);

/// One Dormand-Prince 5(4) step. When `err` is given it receives the
/// embedded error estimate (5th minus 4th order solution).
Vector dopri_step(const Rhs& f, const Vector& y, double h, Vector* err = nullptr);

/// Integrates for the signed duration `T` (negative integrates the
/// time-reversed field). Throws StateEscape when `domain` rejects an
/// accepted state and StepFailure when the step size underflows.
Vector propagate(const Rhs& f, const Vector& y0, double T, const Options& opts,
                 const Observer& observer = {}, const DomainCheck& domain = {});

struct EventHit {
  double t = 0.0;  // signed time of the crossing
  Vector y;
};

struct EventOptions {
  EventDirection direction = EventDirection::either;
  double tol_time = 1e-13;       // bisection bracket width
  double fd_step_scale = 6e-6;   // for the directional derivative used by the polish
  int polish_iterations = 3;
};

/// Integrates along the sign of `t_max` until `g` changes sign in the
/// requested direction. Brackets the crossing at step level, bisects with
/// fresh single steps from the bracketing state, then polishes with Newton
/// on t -> g(y(t)). Returns nullopt when no crossing occurs within |t_max|.
std::optional<EventHit> propagate_to_event(const Rhs& f, const Vector& y0, double t_max,
                                           const EventFn& g, const EventOptions& ev,
                                           const Options& opts, const Observer& observer = {},
                                           const DomainCheck& domain = {});

}  // namespace hybavg::ode
