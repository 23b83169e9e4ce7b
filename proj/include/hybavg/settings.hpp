#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hybavg {

/// Numerical tolerances shared by every engine. A single record is threaded
/// through all calls so that certificates are reproducible from the values
/// written next to them.
struct Settings {
  // Registration / invariant checks.
  double tol_guard = 1e-10;
  double tol_reset = 1e-9;
  double tol_transversal = 1e-8;
  double tol_orth = 1e-8;
  double order_tol = 0.25;
  double margin = 1e-6;

  // Integrator.
  double ode_rtol = 1e-12;
  double ode_atol = 1e-14;
  double ode_h_min = 1e-15;
  long ode_max_steps = 2'000'000;

  // Event location. max_event_time <= 0 selects 10 phase periods.
  double tol_event_time = 1e-13;
  double max_event_time = 0.0;

  // Central differences use h = fd_step_scale * max(1, |x|).
  double fd_step_scale = std::cbrt(std::numeric_limits<double>::epsilon());

  // Averaging.
  double quad_tol = 1e-10;
  int quad_max_depth = 40;
  int quad_min_depth = 5;

  // Taylor extraction.
  double fit_tol = 1e-3;
  double tol_S0_const = 1e-6;
  double noise_floor = 1e-9;

  // Fixed points.
  double newton_tol = 1e-10;
  int newton_iters = 50;
  int newton_halvings = 20;
  double cond_max = 1e8;
  double jordan_tol = 1e-6;
  double hyperbolicity_floor = 1e-2;

  // Certificate.
  double tol_W_singular = 1e-6;

  double fd_step(double norm) const { return fd_step_scale * std::max(1.0, norm); }
};

/// Name/value view of every tunable field, in declaration order.
std::vector<std::pair<std::string, double>> settings_fields(const Settings& s);

/// Sets a field by name. Throws InvalidArgument for unknown keys.
void set_settings_field(Settings& s, const std::string& key, double value);

/// Reads `key = value` lines (the record format) and applies them on top of
/// the defaults.
Settings load_settings(const std::string& path);

}  // namespace hybavg
