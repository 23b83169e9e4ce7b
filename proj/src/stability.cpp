#include "hybavg/stability.hpp"

#include "hybavg/flow.hpp"
#include "hybavg/numerics.hpp"
#include "hybavg/ode.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hybavg {

namespace {

double min_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

// Measured against the identity scale so that a scalar D(P - id) near zero
// still counts as ill-conditioned.
double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double lo = sv.minCoeff();
  return lo > 0.0 ? std::max(sv.maxCoeff(), 1.0) / lo : kInf;
}

double relative_error(const Matrix& value, const Matrix& oracle) {
  return (value - oracle).norm() / std::max(oracle.norm(), 1e-12);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

ode::EventDirection event_direction(const HybridSystem& sys) {
  switch (sys.def().guard_direction) {
    case CrossingDirection::rising:
      return ode::EventDirection::rising;
    case CrossingDirection::falling:
      return ode::EventDirection::falling;
    default:
      return ode::EventDirection::either;
  }
}

}  // namespace

std::vector<CheckItem> assess_averageability(const HybridSystem& sys, const Settings& s) {
  std::vector<CheckItem> items;
  auto add = [&](std::string id, std::string desc, bool ok, double value, std::string detail = {}) {
    items.push_back(CheckItem{std::move(id), std::move(desc), ok, value, std::move(detail)});
  };

  Matrix Dfbar;
  try {
    const Vector fbar = averaged_field(sys, sys.x2_star(), s);
    const double tol = 10.0 * s.quad_tol;
    add("averaged_equilibrium", "averaged field vanishes at x2*", fbar.norm() <= tol,
        fbar.norm(), "tolerance " + fmt(tol));
    Dfbar = averaged_field_jacobian(sys, sys.x2_star(), s);
  } catch (const Error& e) {
    add("averaged_equilibrium", "averaged field vanishes at x2*", false, kInf, e.what());
    return items;
  }

  TaylorResetExpansion ex;
  try {
    ex = extract_taylor_expansion(sys, {}, {}, s);
  } catch (const PoorFit& e) {
    ex = e.expansion();
    add("taylor_fit", "reset Jacobian is explained by S0 + eps S1 + O(eps^2)", false,
        ex.fit_residual, e.what());
  } catch (const Error& e) {
    add("taylor_fit", "reset Jacobian is explained by S0 + eps S1 + O(eps^2)", false, kInf,
        e.what());
    return items;
  }
  add("remainder_order", "remainder of the eps expansion is second order",
      ex.residual_order >= 2.0 - s.order_tol, ex.residual_order);
  add("S0_constant", "S0 does not vary with x2", ex.S0_constancy_defect <= s.tol_S0_const,
      ex.S0_constancy_defect, "radius " + fmt(ex.sample_radius));

  const double s0_min = min_singular_value(ex.S0);
  add("S0_invertible", "S0 is invertible", s0_min > s.tol_W_singular, s0_min);
  int unity = 0;
  const bool jordan = unity_jordan_blocks_diagonal(ex.S0, s.jordan_tol, &unity);
  add("unity_jordan_diagonal", "unity eigenvalues of S0 have diagonal Jordan blocks", jordan,
      unity);
  const Matrix W = ex.S1 + sys.x1_star() * ex.S0 * Dfbar;
  const double w_min = min_singular_value(W);
  add("W_invertible", "S1 + x1* S0 Df_bar is invertible", w_min > s.tol_W_singular, w_min);
  return items;
}

Vector full_poincare_map(const HybridSystem& sys, const Vector& x2, double eps,
                         const Settings& s) {
  sys.require_eps(eps);
  const StateX x0{0.0, x2};
  sys.require_state(x0);
  ode::EventOptions ev;
  ev.direction = event_direction(sys);
  ev.tol_time = s.tol_event_time;
  ev.fd_step_scale = s.fd_step_scale;
  const auto hit = ode::propagate_to_event(
      [&sys, eps](const Vector& y) { return sys.field(y, eps); }, x0.packed(),
      sys.max_event_time(s), [&sys, eps](const Vector& y) { return sys.guard(StateX::unpack(y), eps); },
      ev, ode::options_from(s), {}, [&sys](const Vector& y) { return sys.in_domain(y); });
  if (!hit) throw NoCrossing("stride from the post-reset section never reached the guard");
  const StateX at = StateX::unpack(hit->y);
  const double tr = sys.guard_gradient(at, eps, s).dot(sys.field(at, eps));
  if (std::abs(tr) < s.tol_transversal) throw Tangency("guard tangency during the stride", tr);
  return sys.reset(at, eps).x2;
}

Vector constant_flow_time_map(const HybridSystem& sys, const Vector& x2, double eps,
                              const Settings& s) {
  const EventCrossing c = flow_to_section(sys, StateX{0.0, x2}, eps, sys.x1_star(), s);
  return effective_reset(sys, c.state_at_crossing.x2, eps, s);
}

Vector find_fixed_point(const SlowMap& map, const Vector& guess, const Settings& s, double eps) {
  Vector x = guess;
  auto residual_of = [&](const Vector& v, Vector& r) -> double {
    try {
      r = map(v) - v;
    } catch (const NumericalError&) {
      return kInf;
    } catch (const UsageError&) {
      return kInf;
    }
    return r.allFinite() ? r.norm() : kInf;
  };
  Vector r;
  double res = residual_of(x, r);
  if (!std::isfinite(res)) throw NoConvergence("map undefined at the initial guess");

  auto singularity_check = [&](const Vector& at, double at_res) {
    const Eigen::Index n = at.size();
    const Matrix J = numerics::jacobian_fd(map, at, s.fd_step_scale) - Matrix::Identity(n, n);
    const double cond = condition_number(J);
    const double smin = min_singular_value(J);
    if (cond > s.cond_max) {
      throw SingularJacobian("D(P - id) condition number " + fmt(cond) + " exceeds cond_max",
                             at, at_res, cond);
    }
    if (eps > 0.0 && smin < s.hyperbolicity_floor * eps) {
      throw SingularJacobian("D(P - id) smallest singular value " + fmt(smin) +
                                 " is below hyperbolicity_floor * eps",
                             at, at_res, cond);
    }
  };

  for (int it = 0; it < s.newton_iters; ++it) {
    if (res <= s.newton_tol) {
      singularity_check(x, res);
      return x;
    }
    const Eigen::Index n = x.size();
    const Matrix J = numerics::jacobian_fd(map, x, s.fd_step_scale) - Matrix::Identity(n, n);
    const double cond = condition_number(J);
    if (!std::isfinite(cond) || cond > s.cond_max) {
      throw SingularJacobian("D(P - id) condition number " + fmt(cond) + " exceeds cond_max", x,
                             res, cond);
    }
    const Vector step = J.fullPivLu().solve(-r);
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= s.newton_halvings; ++h, lambda *= 0.5) {
      const Vector trial = x + lambda * step;
      Vector rt;
      const double tres = residual_of(trial, rt);
      if (tres < res || tres <= s.newton_tol) {
        x = trial;
        r = rt;
        res = tres;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (res <= s.newton_tol) {
    singularity_check(x, res);
    return x;
  }
  throw NoConvergence("Newton stalled with residual " + fmt(res));
}

FixedPointResult locate_fixed_point(const HybridSystem& sys, double eps, const Vector& guess,
                                    const Settings& s) {
  const SlowMap P = [&](const Vector& v) { return full_poincare_map(sys, v, eps, s); };
  FixedPointResult out;
  try {
    out.point = find_fixed_point(P, guess, s, eps);
  } catch (const SingularJacobian& e) {
    if (!(e.residual() <= s.newton_tol)) throw;
    out.point = e.point();
    out.non_isolated = true;
  }
  out.residual = (P(out.point) - out.point).norm();
  return out;
}

PoincareJacobian full_poincare_jacobian(const HybridSystem& sys, const Vector& x2, double eps,
                                        const Settings& s) {
  const auto n = sys.n();
  PoincareJacobian out;
  out.direct = numerics::jacobian_fd(
      [&](const Vector& v) { return full_poincare_map(sys, v, eps, s); }, x2, s.fd_step_scale);

  const StateX x0{0.0, x2};
  const EventCrossing c = flow_to_section(sys, x0, eps, sys.x1_star(), s);
  const Matrix DPhi = flow_jacobian(sys, x0, eps, c.tau, JacobianMethod::variational, s);
  const Vector F = sys.field(c.state_at_crossing, eps);
  Matrix proj = Matrix::Identity(n + 1, n + 1);
  proj.col(0) -= F / F(0);
  const Matrix DQ = (proj * DPhi).block(1, 1, n, n);
  out.chain_rule = effective_reset_jacobian_analytic(sys, c.state_at_crossing.x2, eps, s) * DQ;
  out.disagreement = (out.direct - out.chain_rule).norm();
  return out;
}

bool unity_jordan_blocks_diagonal(const Matrix& S0, double jordan_tol, int* unity_count) {
  const ComplexVector ev = numerics::eigenvalues(S0);
  int m = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i) - 1.0) <= jordan_tol) ++m;
  if (unity_count) *unity_count = m;
  const auto n = S0.rows();
  Eigen::JacobiSVD<Matrix> svd(S0 - Matrix::Identity(n, n));
  const auto& sv = svd.singularValues();
  const double thr = jordan_tol * std::max(1.0, S0.norm());
  long rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++rank;
  return rank == n - m;
}

StabilityCertificate certify_orthogonal_reset(const HybridSystem& sys,
                                              const TaylorResetExpansion& e, const Settings& s) {
  const auto n = sys.n();
  const Matrix Dfbar = averaged_field_jacobian(sys, sys.x2_star(), s);
  StabilityCertificate c;
  c.W = e.S0 * e.S1 + sys.x1_star() * Dfbar;
  c.W_first_order = e.S1 + sys.x1_star() * e.S0 * Dfbar;
  c.W_form_used = "S0*S1 + x1*Df_bar";
  c.W_forms_disagree =
      (c.W - c.W_first_order).norm() > s.tol_orth * std::max(1.0, c.W_first_order.norm());
  Eigen::SelfAdjointEigenSolver<Matrix> sym(c.W + c.W.transpose());
  c.symmetric_part_eigs = sym.eigenvalues();
  c.S0_orthogonality_defect = (e.S0.transpose() * e.S0 - Matrix::Identity(n, n)).norm();
  c.W_min_singular_value = min_singular_value(c.W);
  c.jordan_ok = unity_jordan_blocks_diagonal(e.S0, s.jordan_tol, &c.unity_eigenvalue_count);

  if (c.S0_orthogonality_defect > s.tol_orth) {
    c.verdict = Verdict::not_orthogonal;
  } else if (c.W_min_singular_value <= s.tol_W_singular) {
    c.verdict = Verdict::degenerate_W;
  } else if (c.symmetric_part_eigs.maxCoeff() < -s.margin) {
    c.verdict = Verdict::stable;
  } else {
    c.verdict = Verdict::unstable_or_inconclusive;
  }
  return c;
}

SweepReport epsilon_sweep(const HybridSystem& sys, const std::vector<double>& eps_values,
                          const Settings& s, const TaylorResetExpansion* expansion) {
  if (eps_values.size() < 5) throw InvalidArgument("epsilon sweep needs at least 5 values");
  for (std::size_t i = 0; i < eps_values.size(); ++i) {
    if (!(eps_values[i] > 0.0)) throw InvalidArgument("epsilon sweep values must be positive");
    if (i > 0 && !(eps_values[i] > eps_values[i - 1]))
      throw InvalidArgument("epsilon sweep values must be strictly increasing");
    sys.require_eps(eps_values[i]);
  }
  const double ratio = eps_values[1] / eps_values[0];
  for (std::size_t i = 2; i < eps_values.size(); ++i) {
    if (std::abs(eps_values[i] / eps_values[i - 1] - ratio) > 1e-6 * ratio)
      throw InvalidArgument("epsilon sweep values must be log-spaced");
  }

  TaylorResetExpansion local;
  if (!expansion) {
    try {
      local = extract_taylor_expansion(sys, {}, {}, s);
    } catch (const PoorFit& e) {
      local = e.expansion();
    }
    expansion = &local;
  }

  SweepReport rep;
  rep.eps_values = eps_values;
  Vector guess = sys.x2_star();
  for (double eps : eps_values) {
    SweepPoint p;
    p.eps = eps;
    try {
      const FixedPointResult fp = locate_fixed_point(sys, eps, guess, s);
      p.fixed_point = fp.point;
      p.fp_residual = fp.residual;
      p.non_isolated = fp.non_isolated;
      p.full_jacobian = full_poincare_jacobian(sys, fp.point, eps, s).direct;
      p.averaged_jacobian = averaged_poincare_jacobian(sys, eps, *expansion, s).product;
      p.eig_gap = numerics::spectral_distance(numerics::eigenvalues(p.full_jacobian),
                                              numerics::eigenvalues(p.averaged_jacobian));
      p.drift = (fp.point - sys.x2_star()).norm();
      p.spectral_radius = numerics::spectral_radius(p.full_jacobian);
      p.unit_circle_distance = numerics::unit_circle_distance(p.full_jacobian);
      p.ok = true;
      guess = fp.point;
    } catch (const Error& e) {
      p.ok = false;
      p.failure = e.what();
    }
    rep.points.push_back(p);
  }

  std::vector<double> es, gaps, drifts, ucd;
  for (const auto& p : rep.points) {
    rep.eig_gaps.push_back(p.ok ? p.eig_gap : kNaN);
    rep.fixed_point_drifts.push_back(p.ok ? p.drift : kNaN);
    if (!p.ok) continue;
    es.push_back(p.eps);
    gaps.push_back(p.eig_gap);
    drifts.push_back(p.drift);
    ucd.push_back(p.unit_circle_distance);
  }
  if (es.size() < 2) {
    rep.fitted_gap_order = kNaN;
    rep.fitted_drift_order = kNaN;
    return rep;
  }

  const double x2_scale = std::max(1.0, sys.x2_star().norm());
  rep.fitted_gap_order = numerics::fitted_order(es, gaps, s.noise_floor);
  rep.fitted_drift_order = numerics::fitted_order(es, drifts, s.noise_floor * x2_scale);
  rep.gap_exact = std::isinf(rep.fitted_gap_order);
  rep.drift_exact = std::isinf(rep.fitted_drift_order);

  rep.hyperbolicity_order = numerics::fitted_order(es, ucd, s.noise_floor);
  rep.hyperbolic_at_order_eps = rep.hyperbolicity_order < 1.5;

  // Branch continuity and the empirical range of the certificate.
  const SweepPoint* prev = nullptr;
  rep.stable_below_eps = 0.0;
  bool stable_run = true;
  for (const auto& p : rep.points) {
    if (!p.ok) {
      stable_run = false;
      prev = nullptr;
      continue;
    }
    if (prev) {
      rep.continuation_constant =
          std::max(rep.continuation_constant,
                   (p.fixed_point - prev->fixed_point).norm() / (p.eps - prev->eps));
    }
    if (stable_run && p.spectral_radius < 1.0) {
      rep.stable_below_eps = p.eps;
    } else {
      stable_run = false;
    }
    prev = &p;
  }

  // Quadratic gap model anchored at the smallest eps; the largest eps up to
  // which every gap stays within order_tol (relative) of C eps^2.
  rep.gap_constant = gaps.front() / (es.front() * es.front());
  rep.quadratic_model_max_eps = 0.0;
  for (std::size_t i = 0; i < es.size(); ++i) {
    const double model = rep.gap_constant * es[i] * es[i];
    if (rep.gap_exact || std::abs(gaps[i] - model) <= s.order_tol * model) {
      rep.quadratic_model_max_eps = es[i];
    } else {
      break;
    }
  }
  return rep;
}

OrderEpsFit fit_order_eps(const HybridSystem& sys, double eps_a, double eps_b, const Settings& s) {
  if (!(eps_a > 0.0 && eps_b > eps_a)) throw InvalidArgument("fit_order_eps needs 0 < eps_a < eps_b");
  OrderEpsFit out;
  out.eps_a = eps_a;
  out.eps_b = eps_b;
  auto linearization = [&](double eps) {
    const FixedPointResult fp = locate_fixed_point(sys, eps, sys.x2_star(), s);
    return full_poincare_jacobian(sys, fp.point, eps, s).direct;
  };
  out.DP0 = linearization(0.0);
  out.DPa = linearization(eps_a);
  out.DPb = linearization(eps_b);
  // [a a^2; b b^2] [C1; C2] = [DPa - DP0; DPb - DP0]
  const double det = eps_a * eps_b * eps_b - eps_b * eps_a * eps_a;
  const Matrix da = out.DPa - out.DP0;
  const Matrix db = out.DPb - out.DP0;
  out.C1 = (eps_b * eps_b * da - eps_a * eps_a * db) / det;
  out.C2 = (eps_a * db - eps_b * da) / det;
  out.slope = out.C1.norm();
  return out;
}

RegistrationReport run_property_suite(const HybridSystem& sys, const Settings& s,
                                      const PropertySuiteOptions& opt) {
  RegistrationReport rep = sys.report();
  const auto n = sys.n();
  const double x1s = sys.x1_star();
  const double rate = sys.def().phase_rate;
  std::mt19937_64 rng(20160501);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto slow_sample = [&](double radius) {
    Vector v = sys.x2_star();
    for (Eigen::Index i = 0; i < n; ++i) v(i) += radius * unit(rng);
    return v;
  };
  const double radius = 0.5 * sys.sample_radius();

  std::vector<double> eps_list;
  for (double e : opt.eps_values)
    if (sys.eps_in_range(e)) eps_list.push_back(e);

  auto add = [&](std::string id, std::string desc, bool ok, double value, std::string detail) {
    rep.items.push_back(CheckItem{std::move(id), std::move(desc), ok, value, std::move(detail)});
  };
  auto guarded = [&](const std::string& id, const std::string& desc, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      add(id, desc, false, kInf, e.what());
    }
  };

  // Reset Jacobian assembled from DR, D(gamma) and F vs differences of Rbar.
  guarded("jac.reset", "analytic effective reset Jacobian matches finite differences", [&] {
    double worst = 0.0;
    for (double e : eps_list) {
      worst = std::max(worst, relative_error(effective_reset_jacobian_analytic(sys, e, s),
                                             effective_reset_jacobian_fd(sys, sys.x2_star(), e, s)));
      for (int k = 0; k < 3; ++k) {
        const Vector x2 = slow_sample(radius);
        worst = std::max(worst, relative_error(effective_reset_jacobian_analytic(sys, x2, e, s),
                                               effective_reset_jacobian_fd(sys, x2, e, s)));
      }
    }
    add("jac.reset", "analytic effective reset Jacobian matches finite differences",
        worst <= opt.jacobian_rtol, worst, "relative, tolerance " + fmt(opt.jacobian_rtol));
  });

  // Time-to-event gradient vs differences of the root-found tau.
  guarded("jac.tau_gradient", "time-to-event gradient matches finite differences of tau", [&] {
    double worst = 0.0;
    double worst_event = 0.0;
    for (double e : eps_list) {
      for (int k = 0; k < opt.samples / 2 + 1; ++k) {
        const Vector x2 = k == 0 ? Vector(sys.x2_star()) : slow_sample(radius);
        const EventCrossing c = flow_to_guard(sys, StateX{x1s, x2}, e, s);
        worst_event = std::max(worst_event, std::abs(sys.guard(c.state_at_crossing, e)));
        const Vector analytic = time_to_event_gradient(sys, c.state_at_crossing, e, s);
        const Vector oracle = numerics::gradient_fd(
            [&](const Vector& y) { return flow_to_guard(sys, StateX::unpack(y), e, s).tau; },
            c.state_at_crossing.packed(), s.fd_step_scale);
        worst = std::max(worst, relative_error(analytic, oracle));
      }
    }
    add("jac.tau_gradient", "time-to-event gradient matches finite differences of tau",
        worst <= opt.jacobian_rtol, worst, "relative, tolerance " + fmt(opt.jacobian_rtol));
    add("flow.event_consistency", "guard vanishes at every located crossing",
        worst_event <= s.tol_guard, worst_event, "tolerance " + fmt(s.tol_guard));
  });

  // Variational flow Jacobian vs perturbed initial conditions.
  guarded("jac.flow", "variational flow Jacobian matches finite differences", [&] {
    double worst = 0.0;
    std::uniform_real_distribution<double> phase(0.0, 0.5 * x1s);
    const double t = 0.5 * x1s / rate;
    for (double e : eps_list) {
      for (int k = 0; k < opt.samples; ++k) {
        const StateX x0{phase(rng), slow_sample(radius)};
        worst = std::max(
            worst, relative_error(flow_jacobian(sys, x0, e, t, JacobianMethod::variational, s),
                                  flow_jacobian(sys, x0, e, t, JacobianMethod::finite_difference, s)));
      }
    }
    add("jac.flow", "variational flow Jacobian matches finite differences",
        worst <= opt.jacobian_rtol, worst, "relative, tolerance " + fmt(opt.jacobian_rtol));
  });

  guarded("flow.group_property", "Phi(s + t) = Phi(t, Phi(s))", [&] {
    double worst = 0.0;
    const double t1 = 0.3 * x1s / rate;
    const double t2 = 0.4 * x1s / rate;
    for (double e : eps_list) {
      const StateX x0{0.0, slow_sample(radius)};
      const Vector once = propagate(sys, x0, e, t1 + t2, s).packed();
      const Vector twice = propagate(sys, propagate(sys, x0, e, t1, s), e, t2, s).packed();
      worst = std::max(worst, (once - twice).norm() / std::max(1.0, once.norm()));
    }
    const double tol = 1e3 * s.ode_rtol;
    add("flow.group_property", "Phi(s + t) = Phi(t, Phi(s))", worst <= tol, worst,
        "tolerance " + fmt(tol));
  });

  // The flow-and-reset map from the post-reset section equals the
  // constant-flow-time composition.
  guarded("map.equivalence", "constant-flow-time composition equals the Poincare map", [&] {
    double worst = 0.0;
    int used = 0;
    for (double e : opt.equivalence_eps) {
      if (!sys.eps_in_range(e)) continue;
      for (int k = 0; k < opt.equivalence_samples; ++k) {
        const Vector x2 = k == 0 ? Vector(sys.x2_star()) : slow_sample(radius);
        worst = std::max(worst, (constant_flow_time_map(sys, x2, e, s) -
                                 full_poincare_map(sys, x2, e, s))
                                    .norm());
        ++used;
      }
    }
    add("map.equivalence", "constant-flow-time composition equals the Poincare map",
        worst <= opt.equivalence_tol, worst,
        std::to_string(used) + " samples, tolerance " + fmt(opt.equivalence_tol));
  });
  return rep;
}

}  // namespace hybavg
