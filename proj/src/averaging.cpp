#include "hybavg/averaging.hpp"

#include "hybavg/flow.hpp"
#include "hybavg/numerics.hpp"
#include "hybavg/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hybavg {

namespace {

void require_slow(const HybridSystem& sys, const Vector& x2) {
  const auto& d = sys.def();
  bool ok = x2.size() == sys.n() && x2.allFinite();
  for (Eigen::Index i = 0; ok && i < x2.size(); ++i) {
    ok = x2(i) > d.x2_lower(i) && x2(i) < d.x2_upper(i);
  }
  if (!ok) throw InvalidArgument("slow state outside X2 of " + sys.name());
}

Matrix reset_jacobian(const HybridSystem& sys, const StateX& y, double eps, const Settings& s) {
  return numerics::jacobian_fd(
      [&](const Vector& v) { return sys.reset(StateX::unpack(v), eps).packed(); }, y.packed(),
      s.fd_step_scale);
}

// The eps -> 0 fit shared by the anchor and the constancy samples.
struct QuadraticFit {
  Matrix c0, c1, c2;
  std::vector<Matrix> samples;
};

QuadraticFit fit_jacobians(const HybridSystem& sys, const Vector& x2,
                           const std::vector<double>& grid, const Settings& s) {
  QuadraticFit out;
  for (double e : grid) out.samples.push_back(effective_reset_jacobian_fd(sys, x2, e, s));
  const auto n = sys.n();
  out.c0.resize(n, n);
  out.c1.resize(n, n);
  out.c2.resize(n, n);
  std::vector<double> y(grid.size());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      for (std::size_t i = 0; i < grid.size(); ++i) y[i] = out.samples[i](r, c);
      const Vector p = numerics::polyfit(grid, y, 2);
      out.c0(r, c) = p(0);
      out.c1(r, c) = p(1);
      out.c2(r, c) = p(2);
    }
  }
  return out;
}

}  // namespace

Vector averaged_field(const HybridSystem& sys, const Vector& x2, const Settings& s) {
  require_slow(sys, x2);
  const double x1s = sys.x1_star();
  const auto n = sys.n();
  const Vector integral = numerics::integrate_simpson(
      [&](double sigma) -> Vector { return sys.perturbation({sigma, x2}, 0.0).tail(n); }, 0.0, x1s,
      s.quad_tol * std::abs(x1s), s.quad_max_depth, s.quad_min_depth);
  return integral / x1s;
}

Matrix averaged_field_jacobian(const HybridSystem& sys, const Vector& x2, const Settings& s) {
  return numerics::jacobian_fd([&](const Vector& v) { return averaged_field(sys, v, s); }, x2,
                               s.fd_step_scale);
}

Vector effective_reset(const HybridSystem& sys, const Vector& x2, double eps, const Settings& s) {
  sys.require_eps(eps);
  require_slow(sys, x2);
  const StateX x{sys.x1_star(), x2};
  if (sys.def().constant_flow_time) return sys.reset(x, eps).x2;
  const EventCrossing c = flow_to_guard(sys, x, eps, s, EventSearch::automatic);
  if (!c.converged) throw NoConvergence("guard crossing did not meet tol_guard");
  return sys.reset(c.state_at_crossing, eps).x2;
}

Matrix effective_reset_jacobian_analytic(const HybridSystem& sys, double eps, const Settings& s) {
  return effective_reset_jacobian_analytic(sys, sys.x2_star(), eps, s);
}

Matrix effective_reset_jacobian_analytic(const HybridSystem& sys, const Vector& x2, double eps,
                                         const Settings& s) {
  sys.require_eps(eps);
  require_slow(sys, x2);
  const auto n = sys.n();
  const StateX x{sys.x1_star(), x2};
  const EventCrossing c = flow_to_guard(sys, x, eps, s, EventSearch::automatic);
  const StateX& y = c.state_at_crossing;
  const Vector F = sys.field(y, eps);
  const Vector dg = sys.guard_gradient(y, eps, s);
  const double tr = dg.dot(F);
  if (std::abs(tr) < s.tol_transversal) throw Tangency("guard tangency at the anchor crossing", tr);
  const Matrix DR = reset_jacobian(sys, y, eps, s);
  Matrix saltation = Matrix::Identity(n + 1, n + 1) - F * dg.transpose() / tr;
  Matrix M = DR * saltation;
  if (c.tau != 0.0) M = M * flow_jacobian(sys, x, eps, c.tau, JacobianMethod::variational, s);
  return M.block(1, 1, n, n);
}

Matrix effective_reset_jacobian_fd(const HybridSystem& sys, const Vector& x2, double eps,
                                   const Settings& s) {
  return numerics::jacobian_fd([&](const Vector& v) { return effective_reset(sys, v, eps, s); },
                               x2, s.fd_step_scale);
}

std::vector<double> default_taylor_grid(const HybridSystem& sys) {
  const auto& r = sys.def().eps_range;
  double lo = std::max(1e-3, r.lo > 0.0 ? r.lo : 1e-3);
  double hi = std::min(1e-1, 0.5 * r.hi);
  if (hi <= lo * 10.0) hi = lo * 10.0;
  return numerics::logspace(lo, hi, 8);
}

TaylorResetExpansion extract_taylor_expansion(const HybridSystem& sys,
                                              std::vector<double> eps_grid,
                                              std::vector<Vector> x2_samples, const Settings& s) {
  if (eps_grid.empty()) eps_grid = default_taylor_grid(sys);
  std::sort(eps_grid.begin(), eps_grid.end());
  if (eps_grid.size() < 4) throw InvalidArgument("Taylor extraction needs at least 4 eps values");
  if (!(eps_grid.front() > 0.0) || eps_grid.back() < 10.0 * eps_grid.front()) {
    throw InvalidArgument("Taylor extraction grid must be positive and span at least one decade");
  }
  for (double e : eps_grid) sys.require_eps(e);

  TaylorResetExpansion out;
  out.eps_grid = eps_grid;
  out.sample_radius = sys.sample_radius();
  out.x2_samples = x2_samples.empty() ? ball_samples(sys.x2_star(), out.sample_radius, 5)
                                      : std::move(x2_samples);

  const QuadraticFit fit = fit_jacobians(sys, sys.x2_star(), eps_grid, s);
  out.S0 = fit.c0;
  out.S1 = fit.c1;
  out.S2 = fit.c2;
  const double scale = std::max(1.0, out.S0.norm());
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double e = eps_grid[i];
    const Matrix affine = out.S0 + e * out.S1;
    out.remainder_norms.push_back((fit.samples[i] - affine).norm());
    out.fit_residual =
        std::max(out.fit_residual, (fit.samples[i] - affine - e * e * out.S2).norm() / scale);
  }
  out.residual_order =
      numerics::fitted_order(eps_grid, out.remainder_norms, s.noise_floor * scale);

  for (const Vector& x2 : out.x2_samples) {
    const QuadraticFit at = fit_jacobians(sys, x2, eps_grid, s);
    out.S0_constancy_defect = std::max(out.S0_constancy_defect, (at.c0 - out.S0).norm());
  }

  if (out.fit_residual > s.fit_tol) {
    std::ostringstream os;
    os << "quadratic eps model leaves relative residual " << out.fit_residual;
    throw PoorFit(os.str(), out);
  }
  return out;
}

AveragedJacobian averaged_poincare_jacobian(const HybridSystem& sys, double eps,
                                            const TaylorResetExpansion& e, const Settings& s) {
  sys.require_eps(eps);
  const auto n = sys.n();
  const Matrix Dfbar = averaged_field_jacobian(sys, sys.x2_star(), s);
  const Matrix I = Matrix::Identity(n, n);
  AveragedJacobian out;
  out.product = (e.S0 + eps * e.S1) * (I + eps * sys.x1_star() * Dfbar);
  out.first_order = e.S0 + eps * (e.S1 + sys.x1_star() * e.S0 * Dfbar);
  return out;
}

Vector averaged_flow(const HybridSystem& sys, const Vector& x2, double eps, double span,
                     const Settings& s) {
  sys.require_eps(eps);
  require_slow(sys, x2);
  if (eps == 0.0 || span == 0.0) return x2;
  const ode::Rhs rhs = [&](const Vector& v) -> Vector { return eps * averaged_field(sys, v, s); };
  const auto& d = sys.def();
  return ode::propagate(rhs, x2, span, ode::options_from(s), {}, [&d](const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!(v(i) > d.x2_lower(i) && v(i) < d.x2_upper(i))) return false;
    return true;
  });
}

Vector averaged_poincare_map(const HybridSystem& sys, const Vector& x2, double eps,
                             const Settings& s) {
  return effective_reset(sys, averaged_flow(sys, x2, eps, sys.x1_star(), s), eps, s);
}

}  // namespace hybavg
