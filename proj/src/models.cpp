#include "hybavg/models.hpp"

#include "hybavg/errors.hpp"
#include "hybavg/ode.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace hybavg {

namespace {

constexpr double kPi = std::numbers::pi;

Vector scalar(double v) { return Vector::Constant(1, v); }

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void HopperParams::validate() const {
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidParams(std::string("hopper parameter ") + name + " must be positive, got " +
                          num(v));
    }
  };
  positive("omega", omega);
  positive("k", k);
  positive("beta", beta);
  positive("g", g);
  positive("z0", z0);
  if (!(eps >= 0.0) || !(eps < omega)) {
    throw InvalidParams("hopper parameter eps must lie in [0, omega), got " + num(eps));
  }
}

HybridSystemDef make_vertical_hopper(const HopperParams& p) {
  p.validate();
  const double w = p.omega, k = p.k, b = p.beta, g = p.g;
  HybridSystemDef d;
  d.name = "hopper";
  d.n = 1;
  d.x1_bounds = {-kHopperPhaseHalfWidth, kHopperPhaseHalfWidth};
  d.x2_lower = scalar(0.0);
  d.x2_upper = scalar(kInf);
  d.eps_range = {0.0, w};
  d.phase_rate = w;
  // Time is measured in phase units divided by omega, so the order-eps
  // terms carry a 1/omega relative to the physical rates.
  d.perturbation = [w, k, b](const StateX& x, double) {
    const double th = x.x1, a = x.x2(0);
    const double c = std::cos(th), s = std::sin(th);
    Vector out(2);
    out(0) = (a * b - k) * s * c / (w * a);
    out(1) = -(a * b - k) * c * c / w;
    return out;
  };
  // omega tan(theta) - eps (k/a - beta), multiplied by -cos(theta)/omega so
  // that it stays regular across theta = pi/2; same zero set on the branch
  // through pi, increasing across it.
  d.guard = [w, k, b](const StateX& x, double eps) {
    const double th = x.x1, a = x.x2(0);
    return (eps / w) * (k / a - b) * std::cos(th) - std::sin(th);
  };
  d.guard_direction = CrossingDirection::rising;
  d.reset = [w, g](const StateX& x, double) {
    const double th = x.x1, a = x.x2(0);
    const double c = std::cos(th);
    const double arg = a * a * c * c - 2.0 * g * a * std::sin(th) / (w * w);
    if (!(arg >= 0.0)) throw NonPhysical("touchdown amplitude is not real");
    return StateX{0.0, scalar(std::sqrt(arg))};
  };
  d.anchor = StateX{kPi, scalar(k / b)};
  return d;
}

double HopperOracles::averaged_a(double a0, double eps, double s) const {
  return a_star + (a0 - a_star) * std::exp(-eps * beta * s / (2.0 * omega));
}

HopperOracles hopper_oracles(const HopperParams& p) {
  p.validate();
  HopperOracles o;
  o.omega = p.omega;
  o.k = p.k;
  o.beta = p.beta;
  o.a_star = p.k / p.beta;
  o.Dfbar = -p.beta / (2.0 * p.omega);
  o.S1 = -p.g * p.beta * p.beta / (p.k * std::pow(p.omega, 3));
  o.W = o.S1 + kPi * o.Dfbar;
  return o;
}

std::pair<double, double> hopper_to_phase_energy(const HopperParams& p, double z, double zdot) {
  const double sn = p.z0 - z;
  const double cs = -zdot / p.omega;
  double th = std::atan2(sn, cs);
  if (th < -kPi / 2.0) th += 2.0 * kPi;
  return {th, std::hypot(sn, cs)};
}

std::pair<double, double> hopper_to_physical(const HopperParams& p, double theta, double a) {
  return {p.z0 - a * std::sin(theta), -a * p.omega * std::cos(theta)};
}

PhysicalTrajectory simulate_physical_hopper(const HopperParams& p, double a_init, int n_strides,
                                            const Settings& s) {
  p.validate();
  if (!(a_init > 0.0) || !std::isfinite(a_init)) throw InvalidArgument("a_init must be positive");
  if (n_strides < 1) throw InvalidArgument("n_strides must be at least 1");
  const double w = p.omega, k = p.k, b = p.beta, g = p.g, z0 = p.z0, eps = p.eps;

  auto amplitude = [&](const Vector& y) {
    return std::hypot(z0 - y(0), y(1) / w);
  };
  const ode::Rhs stance = [&](const Vector& y) {
    const double a = amplitude(y);
    Vector dy(2);
    dy(0) = y(1);
    dy(1) = w * w * (z0 - y(0)) + eps * (k / a - b) * y(1);
    return dy;
  };
  const ode::EventFn liftoff = [&](const Vector& y) {
    const double a = amplitude(y);
    return -(z0 - y(0)) / a - (eps / (w * w)) * (k / a - b) * y(1) / a;
  };
  ode::EventOptions ev;
  ev.direction = ode::EventDirection::rising;
  ev.tol_time = s.tol_event_time;
  ev.fd_step_scale = s.fd_step_scale;
  const auto opts = ode::options_from(s);

  PhysicalTrajectory tr;
  auto sample = [&](double t, double z, double zd, HopperMode m, int j, double th, double a) {
    tr.times.push_back(t);
    tr.z.push_back(z);
    tr.zdot.push_back(zd);
    tr.mode.push_back(m);
    tr.stride.push_back(j);
    tr.theta.push_back(th);
    tr.a.push_back(a);
  };

  double t0 = 0.0;
  Vector y(2);
  y << z0, -w * a_init;
  tr.touchdown_times.push_back(0.0);
  tr.touchdown_a.push_back(a_init);
  for (int j = 0; j < n_strides; ++j) {
    const auto hit = ode::propagate_to_event(
        stance, y, 10.0 * kPi / w, liftoff, ev, opts,
        [&](double t, const Vector& v) {
          const auto [th, a] = hopper_to_phase_energy(p, v(0), v(1));
          sample(t0 + t, v(0), v(1), HopperMode::stance, j, th, a);
        },
        [&](const Vector& v) { return amplitude(v) > 0.0 && v.allFinite(); });
    if (!hit) throw NoLiftoff("stance " + std::to_string(j) + " never reached liftoff");
    {
      const auto [th, a] = hopper_to_phase_energy(p, hit->y(0), hit->y(1));
      sample(t0 + hit->t, hit->y(0), hit->y(1), HopperMode::stance, j, th, a);
    }
    const double zl = hit->y(0), vl = hit->y(1);
    t0 += hit->t;
    tr.liftoff_times.push_back(t0);
    tr.stance_durations.push_back(hit->t);
    tr.liftoff_z.push_back(zl);
    tr.liftoff_zdot.push_back(vl);

    const double disc = vl * vl + 2.0 * g * (zl - z0);
    if (!(disc >= 0.0)) throw NonPhysical("flight never returns to touchdown height");
    const double tf = (vl + std::sqrt(disc)) / g;
    if (!(tf > 0.0)) throw NonPhysical("liftoff below touchdown height while descending");
    const double a_td = std::sqrt(disc) / w;
    constexpr int kFlightSamples = 16;
    for (int i = 1; i <= kFlightSamples; ++i) {
      const double t = tf * i / kFlightSamples;
      const double z = i == kFlightSamples ? z0 : zl + vl * t - 0.5 * g * t * t;
      const double zd = i == kFlightSamples ? -std::sqrt(disc) : vl - g * t;
      sample(t0 + t, z, zd, HopperMode::flight, j, 0.0, a_td);
    }
    t0 += tf;
    y << z0, -std::sqrt(disc);
    tr.touchdown_times.push_back(t0);
    tr.touchdown_a.push_back(a_td);
  }
  return tr;
}

ResidualSeries residual_vs_averaged(const HopperParams& p, double a_init, int n_strides,
                                    const Settings& s) {
  const HopperOracles o = hopper_oracles(p);
  ResidualSeries out;
  out.trajectory = simulate_physical_hopper(p, a_init, n_strides, s);
  const auto& tr = out.trajectory;
  for (int j = 0; j <= n_strides; ++j) {
    const double avg = o.averaged_a(a_init, p.eps, j * kPi);
    out.stride.push_back(j);
    out.a_hybrid.push_back(tr.touchdown_a[j]);
    out.a_averaged.push_back(avg);
    out.residual.push_back(tr.touchdown_a[j] - avg);
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(out.residual.back()));
  }
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double phase = tr.mode[i] == HopperMode::stance ? std::clamp(tr.theta[i], 0.0, kPi) : kPi;
    const double avg = o.averaged_a(a_init, p.eps, tr.stride[i] * kPi + phase);
    out.a_averaged_dense.push_back(avg);
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(tr.a[i] - avg));
  }
  return out;
}

HybridSystemDef make_nonhyperbolic_example(double x1_star) {
  if (!(x1_star > 0.0) || !std::isfinite(x1_star)) {
    throw InvalidParams("x1_star must be positive, got " + num(x1_star));
  }
  HybridSystemDef d;
  d.name = "nonhyperbolic";
  d.n = 1;
  d.x1_bounds = {-x1_star, 2.0 * x1_star};
  d.x2_lower = scalar(-kInf);
  d.x2_upper = scalar(kInf);
  d.eps_range = {0.0, kInf};
  d.perturbation = [](const StateX& x, double) {
    Vector out(2);
    out << 0.0, -x.x2(0);
    return out;
  };
  d.guard = constant_flow_time_guard(x1_star);
  d.constant_flow_time = true;
  d.reset = [x1_star](const StateX& x, double eps) {
    return StateX{0.0, scalar(x.x2(0) + eps * x1_star * x.x2(0))};
  };
  d.anchor = StateX{x1_star, scalar(0.0)};
  return d;
}

HybridSystemDef make_classical_example() {
  constexpr double period = 2.0 * kPi;
  HybridSystemDef d;
  d.name = "classical";
  d.n = 1;
  d.x1_bounds = {-kPi, 3.0 * kPi};
  d.x2_lower = scalar(-10.0);
  d.x2_upper = scalar(10.0);
  d.eps_range = {0.0, 1.0};
  d.perturbation = [](const StateX& x, double) {
    const double y = x.x2(0);
    Vector out(2);
    out << 0.0, -y + std::sin(x.x1) + std::cos(x.x1) * y * y;
    return out;
  };
  d.guard = constant_flow_time_guard(period);
  d.constant_flow_time = true;
  d.reset = [](const StateX& x, double) { return StateX{0.0, x.x2}; };
  d.anchor = StateX{period, scalar(0.0)};
  return d;
}

const std::vector<ModelInfo>& model_catalog() {
  static const std::vector<ModelInfo> catalog{
      {"hopper", "vertical hopper in phase-energy coordinates",
       {{"omega", 50.0}, {"k", 0.4}, {"beta", 10.0}, {"g", 9.81}, {"eps", 2.0}, {"z0", 0.17}}},
      {"nonhyperbolic", "constant-flow-time system whose return map is 1 + O(eps^2)",
       {{"x1_star", 1.0}, {"eps", 0.01}}},
      {"classical", "identity reset with a periodically forced slow coordinate", {{"eps", 0.1}}},
  };
  return catalog;
}

const ModelInfo& model_info(const std::string& name) {
  for (const auto& m : model_catalog())
    if (m.name == name) return m;
  throw InvalidArgument("unknown model: " + name);
}

HopperParams hopper_params_from(const std::map<std::string, double>& params) {
  HopperParams p;
  auto get = [&](const char* key, double& field) {
    if (auto it = params.find(key); it != params.end()) field = it->second;
  };
  get("omega", p.omega);
  get("k", p.k);
  get("beta", p.beta);
  get("g", p.g);
  get("eps", p.eps);
  get("z0", p.z0);
  return p;
}

BuiltModel build_model(const std::string& name, const std::map<std::string, double>& overrides,
                       const Settings& s) {
  const ModelInfo& info = model_info(name);
  BuiltModel out;
  for (const auto& [key, value] : info.params) out.params[key] = value;
  for (const auto& [key, value] : overrides) {
    if (!out.params.count(key)) {
      throw InvalidArgument("model " + name + " has no parameter " + key);
    }
    out.params[key] = value;
  }
  out.eps = out.params.at("eps");
  HybridSystemDef def;
  if (name == "hopper") {
    def = make_vertical_hopper(hopper_params_from(out.params));
  } else if (name == "nonhyperbolic") {
    def = make_nonhyperbolic_example(out.params.at("x1_star"));
  } else {
    def = make_classical_example();
  }
  if (!def.eps_range.contains_half_open(out.eps)) {
    throw InvalidParams("eps = " + num(out.eps) + " is outside the validity range of " + name);
  }
  out.system = register_system(std::move(def), s);
  return out;
}

Registry& default_registry() {
  static Registry registry;
  static std::once_flag once;
  std::call_once(once, [] {
    for (const auto& m : model_catalog()) registry.add(build_model(m.name, {}).system);
  });
  return registry;
}

}  // namespace hybavg
