#include "commands.hpp"

#include "hybavg/averaging.hpp"
#include "hybavg/errors.hpp"
#include "hybavg/flow.hpp"
#include "hybavg/models.hpp"
#include "hybavg/numerics.hpp"
#include "hybavg/record.hpp"
#include "hybavg/stability.hpp"

#include <chrono>
#include <ctime>
#include <ostream>

namespace hybavg::cli {

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string cell(double v) { return format_double(v); }

void put_common(Record& r, const std::string& command, const BuiltModel& m, const Settings& s) {
  r.put("command", command);
  r.put("model", m.system->name());
  for (const auto& [k, v] : m.params) r.put("param." + k, v);
  for (const auto& [k, v] : settings_fields(s)) r.put("settings." + k, v);
  r.put_metadata("generated_at", utc_now());
  r.put_metadata("tool", "hybavg 0.1.0");
}

void put_checks(Record& r, const std::string& prefix, const RegistrationReport& rep) {
  for (const auto& item : rep.items) {
    r.put(prefix + item.id + ".passed", item.passed);
    r.put(prefix + item.id + ".value", item.value);
  }
}

void emit(const CommonOptions& o, const Record& rec, const CsvWriter* csv, std::ostream& out) {
  if (!o.out.empty()) {
    rec.write(o.out + ".toml");
    if (csv) csv->write(o.out + ".csv");
  }
  if (!o.quiet) out << rec.str();
}

}  // namespace

std::map<std::string, double> parse_overrides(const std::vector<std::string>& tokens) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string key = tokens[i];
    if (key.rfind("--", 0) != 0 || key.size() < 3) {
      throw InvalidArgument("unexpected argument: " + key);
    }
    key = key.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= tokens.size()) throw InvalidArgument("missing value for --" + key);
      value = tokens[++i];
    }
    for (char& c : key)
      if (c == '-') c = '_';
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw InvalidArgument("parameter --" + key + " expects a number, got '" + value + "'");
    }
    out[key] = v;
  }
  return out;
}

Settings resolve_settings(const CommonOptions& o) {
  return o.settings_path.empty() ? Settings{} : load_settings(o.settings_path);
}

int cmd_simulate(const CommonOptions& o, int strides, double x2_init, bool has_x2_init,
                 std::ostream& out) {
  if (strides < 1) throw InvalidArgument("--strides must be at least 1");
  const Settings s = resolve_settings(o);
  const BuiltModel m = build_model(o.model, o.params, s);
  const HybridSystem& sys = *m.system;
  Record rec;
  put_common(rec, "simulate", m, s);
  rec.put("strides", strides);
  CsvWriter csv({"t", "mode", "z", "zdot", "theta", "a", "a_averaged", "residual"});

  if (o.model == "hopper") {
    const HopperParams p = hopper_params_from(m.params);
    const double a0 = has_x2_init ? x2_init : sys.x2_star()(0);
    const ResidualSeries r = residual_vs_averaged(p, a0, strides, s);
    const auto& tr = r.trajectory;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      const double avg = r.a_averaged_dense[i];
      csv.row({cell(tr.times[i]), tr.mode[i] == HopperMode::stance ? "stance" : "flight",
               cell(tr.z[i]), cell(tr.zdot[i]), cell(tr.theta[i]), cell(tr.a[i]), cell(avg),
               cell(tr.a[i] - avg)});
    }
    rec.put("x2_init", a0);
    rec.put("touchdown_a", tr.touchdown_a);
    rec.put("touchdown_times", tr.touchdown_times);
    rec.put("stance_durations", tr.stance_durations);
    rec.put("stride_a_averaged", r.a_averaged);
    rec.put("stride_residual", r.residual);
    rec.put("max_abs_residual", r.max_abs_residual);
  } else {
    if (sys.n() != 1) throw InvalidArgument("simulate writes scalar slow coordinates only");
    const Vector x0 = has_x2_init ? Vector::Constant(1, x2_init) : sys.x2_star();
    const HybridRun run = simulate_hybrid(sys, x0, m.eps, strides, s);
    std::vector<Vector> avg_start{x0};
    for (int k = 0; k < strides; ++k)
      avg_start.push_back(averaged_flow(sys, avg_start.back(), m.eps, sys.x1_star(), s));
    double worst = 0.0;
    std::vector<double> section, residual;
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      const StateX& x = run.states[i];
      const double span = std::clamp(x.x1, 0.0, sys.x1_star());
      const double avg = averaged_flow(sys, avg_start[run.stride[i]], m.eps, span, s)(0);
      const double res = x.x2(0) - avg;
      worst = std::max(worst, std::abs(res));
      csv.row({cell(run.times[i]), "flow", "nan", "nan", cell(x.x1), cell(x.x2(0)), cell(avg),
               cell(res)});
    }
    for (std::size_t k = 0; k < run.section.size(); ++k) {
      section.push_back(run.section[k](0));
      residual.push_back(run.section[k](0) - avg_start[k](0));
      worst = std::max(worst, std::abs(residual.back()));
    }
    rec.put("x2_init", x0);
    rec.put("section_x2", section);
    rec.put("stride_times", run.stride_times);
    rec.put("stride_residual", residual);
    rec.put("max_abs_residual", worst);
  }
  emit(o, rec, &csv, out);
  return kOk;
}

int cmd_certify(const CommonOptions& o, std::ostream& out) {
  const Settings s = resolve_settings(o);
  const BuiltModel m = build_model(o.model, o.params, s);
  const TaylorResetExpansion ex = extract_taylor_expansion(*m.system, {}, {}, s);
  const StabilityCertificate c = certify_orthogonal_reset(*m.system, ex, s);
  Record rec;
  put_common(rec, "certify", m, s);
  rec.put("S0", ex.S0);
  rec.put("S1", ex.S1);
  rec.put("S2", ex.S2);
  rec.put("residual_order", ex.residual_order);
  rec.put("S0_constancy_defect", ex.S0_constancy_defect);
  rec.put("fit_residual", ex.fit_residual);
  rec.put("sample_radius", ex.sample_radius);
  rec.put("taylor_eps_grid", ex.eps_grid);
  rec.put("W", c.W);
  rec.put("W_first_order", c.W_first_order);
  rec.put("W_form_used", c.W_form_used);
  rec.put("W_forms_disagree", c.W_forms_disagree);
  rec.put("symmetric_part_eigs", c.symmetric_part_eigs);
  rec.put("S0_orthogonality_defect", c.S0_orthogonality_defect);
  rec.put("W_min_singular_value", c.W_min_singular_value);
  rec.put("jordan_ok", c.jordan_ok);
  rec.put("unity_eigenvalue_count", c.unity_eigenvalue_count);
  put_checks(rec, "registration.", m.system->report());
  rec.put("verdict", to_string(c.verdict));
  emit(o, rec, nullptr, out);
  return c.verdict == Verdict::stable ? kOk : kNegative;
}

int cmd_sweep(const CommonOptions& o, double eps_min, double eps_max, int points,
              std::ostream& out) {
  if (points < 5) throw InvalidArgument("--points must be at least 5");
  if (!(eps_min > 0.0 && eps_max > eps_min)) {
    throw InvalidArgument("need 0 < --eps-min < --eps-max");
  }
  const Settings s = resolve_settings(o);
  const BuiltModel m = build_model(o.model, o.params, s);
  const SweepReport rep = epsilon_sweep(*m.system, numerics::logspace(eps_min, eps_max, points), s);
  Record rec;
  put_common(rec, "sweep", m, s);
  rec.put("eps_values", rep.eps_values);
  rec.put("eig_gaps", rep.eig_gaps);
  rec.put("fixed_point_drifts", rep.fixed_point_drifts);
  rec.put("fitted_gap_order", rep.fitted_gap_order);
  rec.put("fitted_drift_order", rep.fitted_drift_order);
  rec.put("gap_exact", rep.gap_exact);
  rec.put("drift_exact", rep.drift_exact);
  rec.put("hyperbolicity_order", rep.hyperbolicity_order);
  rec.put("hyperbolic_at_order_eps", rep.hyperbolic_at_order_eps);
  rec.put("continuation_constant", rep.continuation_constant);
  rec.put("stable_below_eps", rep.stable_below_eps);
  rec.put("quadratic_model_max_eps", rep.quadratic_model_max_eps);
  rec.put("gap_constant", rep.gap_constant);
  CsvWriter csv({"eps", "eig_gap", "drift", "fp_residual", "spectral_radius", "non_isolated",
                 "ok"});
  int failures = 0;
  for (const auto& p : rep.points) {
    if (!p.ok) ++failures;
    csv.row({cell(p.eps), cell(p.ok ? p.eig_gap : kNaN), cell(p.ok ? p.drift : kNaN),
             cell(p.ok ? p.fp_residual : kNaN), cell(p.ok ? p.spectral_radius : kNaN),
             p.non_isolated ? "1" : "0", p.ok ? "1" : "0"});
  }
  rec.put("failed_points", failures);
  const bool pass = rep.fitted_gap_order >= 2.0 - s.order_tol;
  rec.put("gap_order_ok", pass);
  emit(o, rec, &csv, out);
  return pass ? kOk : kNegative;
}

int cmd_check(const CommonOptions& o, std::ostream& out) {
  const Settings s = resolve_settings(o);
  const BuiltModel m = build_model(o.model, o.params, s);
  const RegistrationReport rep = run_property_suite(*m.system, s);
  Record rec;
  put_common(rec, "check", m, s);
  put_checks(rec, "", rep);
  rec.put("all_passed", rep.all_passed());
  emit(o, rec, nullptr, out);
  return rep.all_passed() ? kOk : kNegative;
}

}  // namespace hybavg::cli
