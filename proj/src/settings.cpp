#include "hybavg/settings.hpp"

#include "hybavg/errors.hpp"
#include "hybavg/record.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <type_traits>

namespace hybavg {

namespace {

template <class F>
void for_each_field(Settings& s, F&& f) {
  f("tol_guard", s.tol_guard);
  f("tol_reset", s.tol_reset);
  f("tol_transversal", s.tol_transversal);
  f("tol_orth", s.tol_orth);
  f("order_tol", s.order_tol);
  f("margin", s.margin);
  f("ode_rtol", s.ode_rtol);
  f("ode_atol", s.ode_atol);
  f("ode_h_min", s.ode_h_min);
  f("ode_max_steps", s.ode_max_steps);
  f("tol_event_time", s.tol_event_time);
  f("max_event_time", s.max_event_time);
  f("fd_step_scale", s.fd_step_scale);
  f("quad_tol", s.quad_tol);
  f("quad_max_depth", s.quad_max_depth);
  f("quad_min_depth", s.quad_min_depth);
  f("fit_tol", s.fit_tol);
  f("tol_S0_const", s.tol_S0_const);
  f("noise_floor", s.noise_floor);
  f("newton_tol", s.newton_tol);
  f("newton_iters", s.newton_iters);
  f("newton_halvings", s.newton_halvings);
  f("cond_max", s.cond_max);
  f("jordan_tol", s.jordan_tol);
  f("hyperbolicity_floor", s.hyperbolicity_floor);
  f("tol_W_singular", s.tol_W_singular);
}

}  // namespace

std::vector<std::pair<std::string, double>> settings_fields(const Settings& s) {
  std::vector<std::pair<std::string, double>> out;
  Settings copy = s;
  for_each_field(copy, [&](const char* name, auto& v) {
    out.emplace_back(name, static_cast<double>(v));
  });
  return out;
}

void set_settings_field(Settings& s, const std::string& key, double value) {
  bool found = false;
  for_each_field(s, [&](const char* name, auto& v) {
    if (key != name) return;
    found = true;
    using T = std::decay_t<decltype(v)>;
    if constexpr (std::is_integral_v<T>) {
      if (value != std::floor(value) || value < 0) {
        throw InvalidArgument("setting " + key + " must be a non-negative integer");
      }
    }
    if (!std::isfinite(value)) throw InvalidArgument("setting " + key + " must be finite");
    v = static_cast<T>(value);
  });
  if (!found) throw InvalidArgument("unknown setting: " + key);
}

Settings load_settings(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot read settings file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  Settings s;
  for (const auto& [key, literal] : parse_record(buf.str())) {
    if (key == "schema" || key.rfind("metadata.", 0) == 0) continue;
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(literal, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != literal.size()) {
      throw InvalidArgument("setting " + key + " is not a number: " + literal);
    }
    set_settings_field(s, key, value);
  }
  return s;
}

}  // namespace hybavg
