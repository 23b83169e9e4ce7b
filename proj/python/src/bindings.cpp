#include "hybavg/averaging.hpp"
#include "hybavg/errors.hpp"
#include "hybavg/models.hpp"
#include "hybavg/numerics.hpp"
#include "hybavg/settings.hpp"
#include "hybavg/stability.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hybavg;

namespace {

struct PySystem {
  SystemHandle h;
  const HybridSystem& operator*() const { return *h; }
};

Settings settings_from(const py::dict& overrides) {
  Settings s;
  for (const auto& [k, v] : overrides)
    set_settings_field(s, py::cast<std::string>(k), py::cast<double>(v));
  return s;
}

py::dict as_dict(const std::vector<std::pair<std::string, double>>& fields) {
  py::dict d;
  for (const auto& [k, v] : fields) d[py::str(k)] = v;
  return d;
}

py::dict report_dict(const RegistrationReport& r) {
  py::dict d;
  for (const auto& item : r.items) {
    py::dict e;
    e["passed"] = item.passed;
    e["value"] = item.value;
    e["description"] = item.description;
    e["detail"] = item.detail;
    d[py::str(item.id)] = e;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Averaging and stability analysis for single-mode hybrid systems.";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<UsageError>(m, "UsageError", error);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error);
  py::register_exception<SingularJacobian>(m, "SingularJacobian", numerical);

  m.def("default_settings", [] { return as_dict(settings_fields(Settings{})); });

  py::class_<PySystem>(m, "System")
      .def_property_readonly("name", [](const PySystem& s) { return s.h->name(); })
      .def_property_readonly("n", [](const PySystem& s) { return s.h->n(); })
      .def_property_readonly("x1_star", [](const PySystem& s) { return s.h->x1_star(); })
      .def_property_readonly("x2_star", [](const PySystem& s) { return s.h->x2_star(); })
      .def_property_readonly("report", [](const PySystem& s) { return report_dict(s.h->report()); })
      .def("__repr__", [](const PySystem& s) { return "<hybavg.System " + s.h->name() + ">"; });

  m.def("models", [] {
    std::vector<std::string> names;
    for (const auto& info : model_catalog()) names.push_back(info.name);
    return names;
  });
  m.def("model_params", [](const std::string& name) { return as_dict(model_info(name).params); });
  m.def(
      "build_model",
      [](const std::string& name, const std::map<std::string, double>& params,
         const py::dict& settings) {
        const BuiltModel b = build_model(name, params, settings_from(settings));
        return py::make_tuple(PySystem{b.system}, b.eps);
      },
      py::arg("name"), py::arg("params") = std::map<std::string, double>{},
      py::arg("settings") = py::dict());

  m.def(
      "averaged_field",
      [](const PySystem& sys, const Vector& x2, const py::dict& s) {
        return averaged_field(*sys, x2, settings_from(s));
      },
      py::arg("system"), py::arg("x2"), py::arg("settings") = py::dict());

  m.def(
      "taylor_expansion",
      [](const PySystem& sys, const py::dict& s) {
        const TaylorResetExpansion e = extract_taylor_expansion(*sys, {}, {}, settings_from(s));
        py::dict d;
        d["S0"] = e.S0;
        d["S1"] = e.S1;
        d["S2"] = e.S2;
        d["residual_order"] = e.residual_order;
        d["fit_residual"] = e.fit_residual;
        d["eps_grid"] = e.eps_grid;
        return d;
      },
      py::arg("system"), py::arg("settings") = py::dict());

  m.def(
      "certify",
      [](const PySystem& sys, const py::dict& s) {
        const Settings st = settings_from(s);
        const StabilityCertificate c =
            certify_orthogonal_reset(*sys, extract_taylor_expansion(*sys, {}, {}, st), st);
        py::dict d;
        d["W"] = c.W;
        d["W_first_order"] = c.W_first_order;
        d["W_forms_disagree"] = c.W_forms_disagree;
        d["symmetric_part_eigs"] = c.symmetric_part_eigs;
        d["S0_orthogonality_defect"] = c.S0_orthogonality_defect;
        d["W_min_singular_value"] = c.W_min_singular_value;
        d["jordan_ok"] = c.jordan_ok;
        d["verdict"] = to_string(c.verdict);
        return d;
      },
      py::arg("system"), py::arg("settings") = py::dict());

  m.def(
      "poincare_map",
      [](const PySystem& sys, const Vector& x2, double eps, const py::dict& s) {
        return full_poincare_map(*sys, x2, eps, settings_from(s));
      },
      py::arg("system"), py::arg("x2"), py::arg("eps"), py::arg("settings") = py::dict());

  m.def(
      "averaged_poincare_map",
      [](const PySystem& sys, const Vector& x2, double eps, const py::dict& s) {
        return averaged_poincare_map(*sys, x2, eps, settings_from(s));
      },
      py::arg("system"), py::arg("x2"), py::arg("eps"), py::arg("settings") = py::dict());

  m.def(
      "fixed_point",
      [](const PySystem& sys, double eps, const Vector& guess, const py::dict& s) {
        const FixedPointResult r = locate_fixed_point(*sys, eps, guess, settings_from(s));
        return py::make_tuple(r.point, r.residual, r.non_isolated);
      },
      py::arg("system"), py::arg("eps"), py::arg("guess"), py::arg("settings") = py::dict());

  m.def(
      "sweep",
      [](const PySystem& sys, double eps_min, double eps_max, int points, const py::dict& s) {
        const SweepReport r =
            epsilon_sweep(*sys, numerics::logspace(eps_min, eps_max, points), settings_from(s));
        py::dict d;
        d["eps"] = r.eps_values;
        d["eig_gaps"] = r.eig_gaps;
        d["drifts"] = r.fixed_point_drifts;
        d["gap_order"] = r.fitted_gap_order;
        d["drift_order"] = r.fitted_drift_order;
        d["drift_exact"] = r.drift_exact;
        d["hyperbolic_at_order_eps"] = r.hyperbolic_at_order_eps;
        d["stable_below_eps"] = r.stable_below_eps;
        return d;
      },
      py::arg("system"), py::arg("eps_min"), py::arg("eps_max"), py::arg("points"),
      py::arg("settings") = py::dict());

  m.def(
      "check",
      [](const PySystem& sys, const py::dict& s) {
        return report_dict(run_property_suite(*sys, settings_from(s)));
      },
      py::arg("system"), py::arg("settings") = py::dict());

  m.def(
      "simulate_hopper",
      [](const std::map<std::string, double>& params, double a_init, int strides) {
        const HopperParams p = hopper_params_from(build_model("hopper", params).params);
        const ResidualSeries r = residual_vs_averaged(p, a_init, strides);
        const auto& tr = r.trajectory;
        py::dict d;
        d["t"] = tr.times;
        d["z"] = tr.z;
        d["zdot"] = tr.zdot;
        d["theta"] = tr.theta;
        d["a"] = tr.a;
        d["a_averaged"] = r.a_averaged_dense;
        d["touchdown_a"] = tr.touchdown_a;
        d["stride_residual"] = r.residual;
        d["max_abs_residual"] = r.max_abs_residual;
        return d;
      },
      py::arg("params") = std::map<std::string, double>{}, py::arg("a_init") = 0.04,
      py::arg("strides") = 10);
}
