#pragma once

#include "hybavg/settings.hpp"
#include "hybavg/types.hpp"

#include <functional>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

namespace hybavg {

/// (state, eps) -> (F1, F2), the order-eps part of the vector field.
using PerturbationFn = std::function<Vector(const StateX&, double)>;
using GuardFn = std::function<double(const StateX&, double)>;
using ResetFn = std::function<StateX(const StateX&, double)>;

/// Direction in which the flow must cross the guard for the event to count.
enum class CrossingDirection { rising, falling, either };

/// A single-mode hybrid system with phase coordinate x1 and slow
/// coordinates x2. The continuous dynamics are
///
///   x' = phase_rate * (e1 + eps * (F1(x), F2(x)))
///
/// so that with phase_rate = 1 the phase coordinate is the time variable.
/// Callbacks must be pure.
struct HybridSystemDef {
  std::string name;
  int n = 1;
  Interval x1_bounds;
  Vector x2_lower;  // open box, entries may be -inf
  Vector x2_upper;  // open box, entries may be +inf
  Interval eps_range{0.0, kInf};
  double phase_rate = 1.0;
  PerturbationFn perturbation;
  GuardFn guard;
  CrossingDirection guard_direction = CrossingDirection::rising;
  bool constant_flow_time = false;  // guard is {x1*} x X2
  ResetFn reset;
  StateX anchor;
};

struct CheckItem {
  std::string id;  // e.g. "anchor_on_guard"
  std::string description;
  bool passed = false;
  double value = 0.0;
  std::string detail;
};

/// Outcome of the averageability checks attached at registration.
struct RegistrationReport {
  std::vector<CheckItem> items;

  bool all_passed() const;
  const CheckItem* find(const std::string& id) const;
};

/// A validated, immutable system.
class HybridSystem {
 public:
  const HybridSystemDef& def() const { return def_; }
  const std::string& name() const { return def_.name; }
  int n() const { return def_.n; }
  double x1_star() const { return def_.anchor.x1; }
  const Vector& x2_star() const { return def_.anchor.x2; }
  const RegistrationReport& report() const { return report_; }

  /// Full vector field including the phase rate.
  Vector field(const StateX& x, double eps) const;
  Vector field(const Vector& packed, double eps) const { return field(StateX::unpack(packed), eps); }
  Vector perturbation(const StateX& x, double eps) const;
  double guard(const StateX& x, double eps) const { return def_.guard(x, eps); }
  StateX reset(const StateX& x, double eps) const { return def_.reset(x, eps); }

  bool in_domain(const StateX& x) const;
  bool in_domain(const Vector& packed) const;
  bool eps_in_range(double eps) const { return def_.eps_range.contains_half_open(eps); }
  void require_eps(double eps) const;
  void require_state(const StateX& x) const;

  /// Central-difference gradient of the guard (length n+1).
  Vector guard_gradient(const StateX& x, double eps, const Settings& s) const;

  /// Default event search horizon: 10 phase periods unless overridden.
  double max_event_time(const Settings& s) const;

  /// Slow-state sampling radius used for the constancy and equivalence checks.
  double sample_radius() const;

 private:
  friend std::shared_ptr<const HybridSystem> register_system(HybridSystemDef, const Settings&);
  HybridSystem() = default;

  HybridSystemDef def_;
  RegistrationReport report_;
};

using SystemHandle = std::shared_ptr<const HybridSystem>;

/// Validates `def` and returns an immutable handle with the averageability
/// report attached. Structural violations (anchor off the guard, phase of
/// the reset not identically zero, reset not fixing x2*) throw InvalidSystem;
/// the remaining conditions are recorded in the report only.
SystemHandle register_system(HybridSystemDef def, const Settings& settings = {});

/// Thread-safe name -> system map.
class Registry {
 public:
  SystemHandle add(HybridSystemDef def, const Settings& settings = {});
  void add(SystemHandle handle);
  SystemHandle get(const std::string& name) const;  // throws InvalidArgument
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, SystemHandle> systems_;
};

/// Guard x1 - x1* for constant-flow-time systems.
GuardFn constant_flow_time_guard(double x1_star);

/// Deterministic slow-state samples in a ball of the given radius around
/// `center` (always includes the center; at least `count` points).
std::vector<Vector> ball_samples(const Vector& center, double radius, int count);

}  // namespace hybavg
