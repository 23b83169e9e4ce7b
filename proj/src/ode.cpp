#include "hybavg/ode.hpp"

#include "hybavg/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hybavg::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const Options& o) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    acc += r * r;
  }
  const double v = std::sqrt(acc / static_cast<double>(err.size()));
  return std::isfinite(v) ? v : kInf;
}

double initial_step(const Rhs& f, const Vector& y0, double span, const Options& o) {
  const Vector f0 = f(y0);
  double d0 = 0.0;
  double d1 = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double sc = o.atol + o.rtol * std::abs(y0(i));
    d0 += (y0(i) / sc) * (y0(i) / sc);
    d1 += (f0(i) / sc) * (f0(i) / sc);
  }
  d0 = std::sqrt(d0 / y0.size());
  d1 = std::sqrt(d1 / y0.size());
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  if (!std::isfinite(h) || h <= 0.0) h = 1e-6;
  return std::min(h, span);
}

Rhs reversed(const Rhs& f) {
  return [&f](const Vector& y) -> Vector { return -f(y); };
}

bool crosses(double g0, double g1, EventDirection dir) {
  switch (dir) {
    case EventDirection::rising:
      return g0 < 0.0 && g1 >= 0.0;
    case EventDirection::falling:
      return g0 > 0.0 && g1 <= 0.0;
    case EventDirection::either:
      return (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
  }
  return false;
}

EventDirection in_integration_time(EventDirection d, bool backward) {
  if (!backward || d == EventDirection::either) return d;
  return d == EventDirection::rising ? EventDirection::falling : EventDirection::rising;
}

// Shared stepping loop; `on_step` returns true to stop after an accepted step.
template <typename OnStep>
Vector drive(const Rhs& f, const Vector& y0, double span, const Options& o,
             const DomainCheck& domain, OnStep&& on_step) {
  Vector y = y0;
  if (span <= 0.0) return y;
  double t = 0.0;
  double h = initial_step(f, y0, span, o);
  long steps = 0;
  Vector err(y0.size());
  while (t < span) {
    if (++steps > o.max_steps) throw StepFailure("integrator exceeded the step budget");
    const bool last = h >= span - t;
    const double step = last ? span - t : h;
    const Vector y1 = dopri_step(f, y, step, &err);
    const double en = y1.allFinite() ? error_norm(err, y, y1, o) : kInf;
    if (en <= 1.0) {
      if (domain && !domain(y1)) {
        // Shorten the step so that events just inside the boundary are seen.
        h = 0.5 * step;
        if (h < o.h_min * std::max(1.0, std::abs(t))) {
          throw StateEscape("trajectory left the state domain");
        }
        continue;
      }
      const double t0 = t;
      t = last ? span : t + step;
      const Vector y_prev = y;
      y = y1;
      if (on_step(t0, y_prev, step, t, y)) return y;
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (!last) h = step * fac;
    } else {
      h = step * std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
      if (h < o.h_min * std::max(1.0, std::abs(t))) {
        throw StepFailure("integrator step size underflow");
      }
    }
  }
  return y;
}

}  // namespace

Options options_from(const Settings& s) {
  return Options{s.ode_rtol, s.ode_atol, s.ode_h_min, s.ode_max_steps};
}

Vector dopri_step(const Rhs& f, const Vector& y, double h, Vector* err) {
  const Vector k1 = f(y);
  const Vector k2 = f(y + h * (a21 * k1));
  const Vector k3 = f(y + h * (a31 * k1 + a32 * k2));
  const Vector k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vector k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vector k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  Vector y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  if (err != nullptr) {
    const Vector k7 = f(y1);
    *err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  }
  return y1;
}

Vector propagate(const Rhs& f, const Vector& y0, double T, const Options& opts,
                 const Observer& observer, const DomainCheck& domain) {
  const bool backward = T < 0.0;
  const double sign = backward ? -1.0 : 1.0;
  const Rhs g = backward ? reversed(f) : f;
  if (observer) observer(0.0, y0);
  return drive(g, y0, std::abs(T), opts, domain,
               [&](double, const Vector&, double, double t, const Vector& y) {
                 if (observer) observer(sign * t, y);
                 return false;
               });
}

std::optional<EventHit> propagate_to_event(const Rhs& f, const Vector& y0, double t_max,
                                           const EventFn& g, const EventOptions& ev,
                                           const Options& opts, const Observer& observer,
                                           const DomainCheck& domain) {
  const bool backward = t_max < 0.0;
  const double sign = backward ? -1.0 : 1.0;
  const Rhs fi = backward ? reversed(f) : f;
  const EventDirection dir = in_integration_time(ev.direction, backward);

  std::optional<EventHit> hit;
  double g_prev = g(y0);
  if (observer) observer(0.0, y0);

  auto on_step = [&](double t0, const Vector& y_start, double h, double t1, const Vector& y1) {
    const double g1 = g(y1);
    if (!crosses(g_prev, g1, dir)) {
      g_prev = g1;
      if (observer) observer(sign * t1, y1);
      return false;
    }
    // Bisect on the step offset, re-stepping from the bracketing state.
    double lo = 0.0;
    double hi = h;
    double g_lo = g_prev;
    auto at = [&](double d) { return d == h ? y1 : dopri_step(fi, y_start, d); };
    while (hi - lo > ev.tol_time) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(at(mid));
      if (crosses(g_lo, gm, EventDirection::either)) {
        hi = mid;
      } else {
        lo = mid;
        g_lo = gm;
      }
    }
    double d = 0.5 * (lo + hi);
    Vector yd = at(d);
    for (int it = 0; it < ev.polish_iterations; ++it) {
      const double gv = g(yd);
      if (gv == 0.0) break;
      const Vector fv = fi(yd);
      const double fn = fv.norm();
      if (fn == 0.0) break;
      const double hd = ev.fd_step_scale * std::max(1.0, yd.norm()) / fn;
      const double slope = (g(yd + hd * fv) - g(yd - hd * fv)) / (2.0 * hd);
      if (slope == 0.0 || !std::isfinite(slope)) break;
      const double next = std::clamp(d - gv / slope, 0.0, h);
      if (next == d) break;
      d = next;
      yd = at(d);
    }
    hit = EventHit{sign * (t0 + d), yd};
    if (observer) observer(hit->t, yd);
    return true;
  };

  drive(fi, y0, std::abs(t_max), opts, domain, on_step);
  return hit;
}

}  // namespace hybavg::ode
