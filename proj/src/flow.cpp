#include "hybavg/flow.hpp"

#include "hybavg/errors.hpp"
#include "hybavg/numerics.hpp"
#include "hybavg/ode.hpp"

#include <cmath>

namespace hybavg {

namespace {

ode::Rhs rhs_of(const HybridSystem& sys, double eps) {
  return [&sys, eps](const Vector& y) { return sys.field(y, eps); };
}

ode::DomainCheck domain_of(const HybridSystem& sys) {
  return [&sys](const Vector& y) { return sys.in_domain(y); };
}

ode::EventDirection to_event_direction(CrossingDirection d) {
  switch (d) {
    case CrossingDirection::rising:
      return ode::EventDirection::rising;
    case CrossingDirection::falling:
      return ode::EventDirection::falling;
    case CrossingDirection::either:
      return ode::EventDirection::either;
  }
  return ode::EventDirection::either;
}

double transversality(const HybridSystem& sys, const StateX& x, double eps, const Settings& s) {
  return sys.guard_gradient(x, eps, s).dot(sys.field(x, eps));
}

EventCrossing run_event_search(const HybridSystem& sys, const StateX& x0, double eps,
                               const Settings& s, const ode::EventFn& g,
                               ode::EventDirection direction, bool backward,
                               const ode::Observer& observer = {}) {
  ode::EventOptions ev;
  ev.direction = direction;
  ev.tol_time = s.tol_event_time;
  ev.fd_step_scale = s.fd_step_scale;
  const double horizon = sys.max_event_time(s);
  const auto hit = ode::propagate_to_event(rhs_of(sys, eps), x0.packed(),
                                           backward ? -horizon : horizon, g, ev,
                                           ode::options_from(s), observer, domain_of(sys));
  if (!hit) {
    throw NoCrossing("no guard crossing within " + std::to_string(horizon) + " time units");
  }
  EventCrossing out;
  out.tau = hit->t;
  out.state_at_crossing = StateX::unpack(hit->y);
  return out;
}

}  // namespace

Trajectory integrate(const HybridSystem& sys, const StateX& x0, double eps, double t_final,
                     const Settings& s) {
  sys.require_eps(eps);
  sys.require_state(x0);
  if (!(t_final >= 0.0)) throw InvalidArgument("integrate: t_final must be non-negative");
  Trajectory out;
  out.eps = eps;
  ode::propagate(
      rhs_of(sys, eps), x0.packed(), t_final, ode::options_from(s),
      [&out](double t, const Vector& y) {
        out.times.push_back(t);
        out.states.push_back(StateX::unpack(y));
      },
      domain_of(sys));
  return out;
}

StateX propagate(const HybridSystem& sys, const StateX& x0, double eps, double t,
                 const Settings& s) {
  sys.require_eps(eps);
  sys.require_state(x0);
  return StateX::unpack(
      ode::propagate(rhs_of(sys, eps), x0.packed(), t, ode::options_from(s), {}, domain_of(sys)));
}

EventCrossing flow_to_guard(const HybridSystem& sys, const StateX& x0, double eps,
                            const Settings& s, EventSearch search) {
  sys.require_eps(eps);
  sys.require_state(x0);
  const double g0 = sys.guard(x0, eps);
  if (std::abs(g0) <= s.tol_guard) {
    const double tr = transversality(sys, x0, eps, s);
    if (std::abs(tr) < s.tol_transversal) throw Tangency("guard tangency at the initial state", tr);
    const CrossingDirection d = sys.def().guard_direction;
    // a zero crossed against the guard direction is not an event
    if (d == CrossingDirection::either || (d == CrossingDirection::rising) == (tr > 0.0)) {
      return EventCrossing{0.0, x0, tr, true};
    }
  }

  bool backward = search == EventSearch::backward;
  if (search == EventSearch::automatic) {
    const double tr0 = transversality(sys, x0, eps, s);
    backward = tr0 != 0.0 && -g0 / tr0 < 0.0;
  }

  const ode::EventFn g = [&sys, eps](const Vector& y) {
    return sys.guard(StateX::unpack(y), eps);
  };
  EventCrossing out =
      run_event_search(sys, x0, eps, s, g, to_event_direction(sys.def().guard_direction), backward);
  out.transversality = transversality(sys, out.state_at_crossing, eps, s);
  if (std::abs(out.transversality) < s.tol_transversal) {
    throw Tangency("guard tangency at the crossing", out.transversality);
  }
  out.converged = std::abs(sys.guard(out.state_at_crossing, eps)) <= s.tol_guard;
  return out;
}

EventCrossing flow_to_section(const HybridSystem& sys, const StateX& x0, double eps,
                              double x1_target, const Settings& s) {
  sys.require_eps(eps);
  sys.require_state(x0);
  if (x0.x1 == x1_target) {
    return EventCrossing{0.0, x0, sys.field(x0, eps)(0), true};
  }
  const ode::EventFn g = [x1_target](const Vector& y) { return y(0) - x1_target; };
  const bool backward = x0.x1 > x1_target;
  EventCrossing out =
      run_event_search(sys, x0, eps, s, g, ode::EventDirection::rising, backward);
  out.transversality = sys.field(out.state_at_crossing, eps)(0);
  if (std::abs(out.transversality) < s.tol_transversal) {
    throw Tangency("phase velocity vanishes at the section", out.transversality);
  }
  out.converged = std::abs(out.state_at_crossing.x1 - x1_target) <= s.tol_guard;
  return out;
}

Vector time_to_event_gradient(const HybridSystem& sys, const StateX& x, double eps,
                              const Settings& s) {
  sys.require_eps(eps);
  const double g = sys.guard(x, eps);
  if (std::abs(g) > s.tol_guard) {
    throw InvalidArgument("time_to_event_gradient: state is not on the guard (|gamma| = " +
                          std::to_string(std::abs(g)) + ")");
  }
  const Vector dg = sys.guard_gradient(x, eps, s);
  const double tr = dg.dot(sys.field(x, eps));
  if (std::abs(tr) < s.tol_transversal) throw Tangency("guard tangency", tr);
  return -dg / tr;
}

Matrix flow_jacobian(const HybridSystem& sys, const StateX& x0, double eps, double t,
                     JacobianMethod method, const Settings& s) {
  sys.require_eps(eps);
  sys.require_state(x0);
  const Eigen::Index m = x0.dim();
  if (method == JacobianMethod::finite_difference) {
    return numerics::jacobian_fd(
        [&](const Vector& y) { return propagate(sys, StateX::unpack(y), eps, t, s).packed(); },
        x0.packed(), s.fd_step_scale);
  }

  const ode::Rhs aug = [&sys, eps, m, &s](const Vector& z) {
    const Vector y = z.head(m);
    const Matrix A = numerics::jacobian_fd([&](const Vector& v) { return sys.field(v, eps); }, y,
                                           s.fd_step_scale);
    const Eigen::Map<const Matrix> Phi(z.data() + m, m, m);
    Vector dz(m + m * m);
    dz.head(m) = sys.field(y, eps);
    Eigen::Map<Matrix>(dz.data() + m, m, m) = A * Phi;
    return dz;
  };
  Vector z0(m + m * m);
  z0.head(m) = x0.packed();
  Eigen::Map<Matrix>(z0.data() + m, m, m) = Matrix::Identity(m, m);
  const Vector z = ode::propagate(aug, z0, t, ode::options_from(s), {},
                                  [&sys, m](const Vector& v) { return sys.in_domain(Vector(v.head(m))); });
  return Eigen::Map<const Matrix>(z.data() + m, m, m);
}

HybridRun simulate_hybrid(const HybridSystem& sys, const Vector& x2_init, double eps, int strides,
                          const Settings& s) {
  if (strides < 1) throw InvalidArgument("simulate_hybrid: strides must be >= 1");
  sys.require_eps(eps);
  HybridRun run;
  Vector x2 = x2_init;
  double t_base = 0.0;
  run.section.push_back(x2);
  const ode::EventFn g = [&sys, eps](const Vector& y) {
    return sys.guard(StateX::unpack(y), eps);
  };
  for (int k = 0; k < strides; ++k) {
    run.stride_times.push_back(t_base);
    const StateX start{0.0, x2};
    sys.require_state(start);
    const EventCrossing c = run_event_search(
        sys, start, eps, s, g, to_event_direction(sys.def().guard_direction), false,
        [&](double t, const Vector& y) {
          run.times.push_back(t_base + t);
          run.states.push_back(StateX::unpack(y));
          run.stride.push_back(k);
        });
    t_base += c.tau;
    x2 = sys.reset(c.state_at_crossing, eps).x2;
    run.section.push_back(x2);
  }
  run.stride_times.push_back(t_base);
  return run;
}

}  // namespace hybavg
