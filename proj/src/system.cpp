#include "hybavg/system.hpp"

#include "hybavg/errors.hpp"
#include "hybavg/numerics.hpp"
#include "hybavg/stability.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace hybavg {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::ostringstream os;
  for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? "; " : "") << parts[i];
  return os.str();
}

std::vector<double> check_eps_values(const Interval& r) {
  if (std::isfinite(r.hi)) {
    const double w = r.hi - r.lo;
    return {r.lo, r.lo + 0.01 * w, r.lo + 0.1 * w, r.lo + 0.5 * w};
  }
  return {r.lo, r.lo + 0.01, r.lo + 0.1, r.lo + 1.0};
}

// Solves gamma(x1, x2) = 0 for x1 near `x1_guess` by secant/Newton on x1.
bool phase_on_guard(const HybridSystemDef& d, const Vector& x2, double eps, double x1_guess,
                    double tol, double& x1_out) {
  double x1 = x1_guess;
  for (int it = 0; it < 40; ++it) {
    const double g = d.guard({x1, x2}, eps);
    if (!std::isfinite(g)) return false;
    if (std::abs(g) <= tol) {
      x1_out = x1;
      return d.x1_bounds.contains_open(x1);
    }
    const double h = 1e-7 * std::max(1.0, std::abs(x1));
    const double dg = (d.guard({x1 + h, x2}, eps) - d.guard({x1 - h, x2}, eps)) / (2.0 * h);
    if (dg == 0.0 || !std::isfinite(dg)) return false;
    x1 -= g / dg;
  }
  return false;
}

}  // namespace

InvalidSystem::InvalidSystem(std::vector<std::string> violations)
    : UsageError("invalid hybrid system: " + join(violations)), violations_(std::move(violations)) {}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::stable:
      return "stable";
    case Verdict::unstable_or_inconclusive:
      return "unstable_or_inconclusive";
    case Verdict::not_orthogonal:
      return "not_orthogonal";
    case Verdict::degenerate_W:
      return "degenerate_W";
  }
  return "unknown";
}

bool RegistrationReport::all_passed() const {
  for (const auto& it : items)
    if (!it.passed) return false;
  return true;
}

const CheckItem* RegistrationReport::find(const std::string& id) const {
  for (const auto& it : items)
    if (it.id == id) return &it;
  return nullptr;
}

Vector HybridSystem::perturbation(const StateX& x, double eps) const {
  return def_.perturbation(x, eps);
}

Vector HybridSystem::field(const StateX& x, double eps) const {
  Vector f = eps * def_.perturbation(x, eps);
  f(0) += 1.0;
  return def_.phase_rate * f;
}

bool HybridSystem::in_domain(const StateX& x) const {
  if (!std::isfinite(x.x1) || !def_.x1_bounds.contains_open(x.x1)) return false;
  if (x.x2.size() != def_.n || !x.x2.allFinite()) return false;
  for (int i = 0; i < def_.n; ++i) {
    if (!(x.x2(i) > def_.x2_lower(i) && x.x2(i) < def_.x2_upper(i))) return false;
  }
  return true;
}

bool HybridSystem::in_domain(const Vector& packed) const {
  return packed.size() == def_.n + 1 && in_domain(StateX::unpack(packed));
}

void HybridSystem::require_eps(double eps) const {
  if (!eps_in_range(eps)) {
    std::ostringstream os;
    os << "eps = " << eps << " outside the validity range [" << def_.eps_range.lo << ", "
       << def_.eps_range.hi << ") of " << def_.name;
    throw InvalidArgument(os.str());
  }
}

void HybridSystem::require_state(const StateX& x) const {
  if (!in_domain(x)) throw InvalidArgument("state outside the domain of " + def_.name);
}

Vector HybridSystem::guard_gradient(const StateX& x, double eps, const Settings& s) const {
  return numerics::gradient_fd([&](const Vector& v) { return guard(StateX::unpack(v), eps); },
                               x.packed(), s.fd_step_scale);
}

double HybridSystem::max_event_time(const Settings& s) const {
  if (s.max_event_time > 0.0) return s.max_event_time;
  return 10.0 * std::abs(x1_star()) / def_.phase_rate;
}

double HybridSystem::sample_radius() const {
  const double r = x2_star().norm();
  return r > 0.0 ? 0.25 * r : 0.1;
}

SystemHandle register_system(HybridSystemDef def, const Settings& settings) {
  std::vector<std::string> fatal;
  std::vector<CheckItem> items;
  auto record = [&](std::string id, std::string desc, bool ok, double value, std::string detail,
                    bool is_fatal) {
    if (!ok && is_fatal) fatal.push_back(id + ": " + desc + (detail.empty() ? "" : " (" + detail + ")"));
    items.push_back({std::move(id), std::move(desc), ok, value, std::move(detail)});
  };

  if (def.n < 1) fatal.push_back("n must be positive");
  if (!def.perturbation || !def.guard || !def.reset) fatal.push_back("missing evaluator callback");
  if (!(def.phase_rate > 0.0) || !std::isfinite(def.phase_rate)) fatal.push_back("phase_rate must be positive");
  if (def.x2_lower.size() == 0) def.x2_lower = Vector::Constant(def.n, -kInf);
  if (def.x2_upper.size() == 0) def.x2_upper = Vector::Constant(def.n, kInf);
  if (def.anchor.x2.size() != def.n || def.x2_lower.size() != def.n || def.x2_upper.size() != def.n) {
    fatal.push_back("slow-state dimension mismatch");
  }
  if (!fatal.empty()) throw InvalidSystem(fatal);

  auto sys = std::shared_ptr<HybridSystem>(new HybridSystem());
  sys->def_ = std::move(def);
  const HybridSystemDef& d = sys->def_;
  const StateX& xs = d.anchor;

  record("phase_interval", "X1 is an open interval around the origin containing x1*",
         d.x1_bounds.contains_open(0.0) && d.x1_bounds.contains_open(xs.x1), xs.x1, "", true);
  record("anchor_in_domain", "anchor lies in X", sys->in_domain(xs), 0.0, "", true);
  if (!fatal.empty()) throw InvalidSystem(fatal);

  const auto eps_values = check_eps_values(d.eps_range);
  {
    bool ok = true;
    for (double e : eps_values) {
      const Vector p = d.perturbation(xs, e);
      ok = ok && p.size() == d.n + 1 && p.allFinite();
    }
    record("field_form", "perturbation (F1, F2) has length n+1 and is finite at x*", ok, 0.0, "",
           true);
  }
  if (!fatal.empty()) throw InvalidSystem(fatal);

  {
    double worst = 0.0;
    for (double e : eps_values) worst = std::max(worst, std::abs(d.guard(xs, e)));
    std::ostringstream os;
    os << "max |gamma(x*)| = " << worst;
    record("anchor_on_guard", "gamma(x*) = 0 across the eps range", worst <= settings.tol_guard,
           worst, os.str(), true);
  }
  {
    double worst = 0.0;
    for (double e : eps_values) worst = std::max(worst, (d.reset(xs, e).x2 - xs.x2).norm());
    std::ostringstream os;
    os << "max |pi2 R(x*) - x2*| = " << worst;
    record("reset_fixes_anchor", "pi2 R(x*) = x2*", worst <= settings.tol_reset, worst,
           os.str(), true);
  }
  {
    double worst = 0.0;
    int samples = 0;
    for (double e : eps_values) {
      for (const Vector& x2 : ball_samples(xs.x2, sys->sample_radius(), 5)) {
        double x1 = 0.0;
        if (!phase_on_guard(d, x2, e, xs.x1, settings.tol_guard, x1)) continue;
        const StateX on{x1, x2};
        if (!sys->in_domain(on)) continue;
        const StateX r = d.reset(on, e);
        if (!std::isfinite(r.x1)) continue;
        worst = std::max(worst, std::abs(r.x1));
        ++samples;
      }
    }
    std::ostringstream os;
    os << "max |pi1 R| = " << worst << " over " << samples << " guard samples";
    record("reset_phase_zero", "pi1 R = 0 on the guard", samples > 0 && worst <= settings.tol_reset,
           worst, os.str(), true);
  }
  {
    const Vector dg = sys->guard_gradient(xs, d.eps_range.lo, settings);
    std::ostringstream os;
    os << "D1 gamma(x*) = " << dg(0);
    record("phase_transversal", "D1 gamma != 0 on the guard at x*",
           std::abs(dg(0)) > settings.tol_transversal, dg(0), os.str(), false);
  }
  if (!fatal.empty()) throw InvalidSystem(fatal);

  for (auto& item : assess_averageability(*sys, settings)) items.push_back(std::move(item));
  sys->report_.items = std::move(items);
  return sys;
}

SystemHandle Registry::add(HybridSystemDef def, const Settings& settings) {
  auto h = register_system(std::move(def), settings);
  add(h);
  return h;
}

void Registry::add(SystemHandle handle) {
  std::unique_lock lock(mutex_);
  systems_[handle->name()] = std::move(handle);
}

SystemHandle Registry::get(const std::string& name) const {
  std::shared_lock lock(mutex_);
  const auto it = systems_.find(name);
  if (it == systems_.end()) throw InvalidArgument("unknown system: " + name);
  return it->second;
}

bool Registry::contains(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return systems_.count(name) > 0;
}

std::vector<std::string> Registry::names() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [k, v] : systems_) out.push_back(k);
  return out;
}

GuardFn constant_flow_time_guard(double x1_star) {
  return [x1_star](const StateX& x, double) { return x.x1 - x1_star; };
}

std::vector<Vector> ball_samples(const Vector& center, double radius, int count) {
  std::vector<Vector> out{center};
  const auto n = center.size();
  for (double scale : {1.0, 0.5}) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vector v = center;
        v(i) += sgn * scale * radius;
        out.push_back(v);
      }
    }
  }
  const Vector diag = Vector::Constant(n, radius / std::sqrt(static_cast<double>(n)));
  while (static_cast<int>(out.size()) < count) {
    const double k = static_cast<double>(out.size());
    out.push_back(center + (std::fmod(k, 2.0) == 0.0 ? 1.0 : -1.0) * diag / k);
  }
  return out;
}

}  // namespace hybavg
