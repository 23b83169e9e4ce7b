#include "hybavg/numerics.hpp"

#include "hybavg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hybavg::numerics {

Matrix jacobian_fd(const VectorMap& f, const Vector& x, double step_scale) {
  const double h = step_scale * std::max(1.0, x.norm());
  Vector xp = x;
  Vector xm = x;
  Matrix J;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    const Vector fp = f(xp);
    const Vector fm = f(xm);
    if (j == 0) J.resize(fp.size(), x.size());
    J.col(j) = (fp - fm) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return J;
}

Vector gradient_fd(const ScalarMap& f, const Vector& x, double step_scale) {
  const double h = step_scale * std::max(1.0, x.norm());
  Vector g(x.size());
  Vector xp = x;
  Vector xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    g(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return g;
}

Vector polyfit(std::span<const double> x, std::span<const double> y, int degree) {
  if (x.size() != y.size() || x.size() < static_cast<std::size_t>(degree + 1)) {
    throw InvalidArgument("polyfit: need at least degree+1 points of matching length");
  }
  const auto m = static_cast<Eigen::Index>(x.size());
  Matrix A(m, degree + 1);
  Vector b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double p = 1.0;
    for (int d = 0; d <= degree; ++d) {
      A(i, d) = p;
      p *= x[i];
    }
    b(i) = y[i];
  }
  return A.colPivHouseholderQr().solve(b);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  std::transform(x.begin(), x.end(), lx.begin(), [](double v) { return std::log(v); });
  std::transform(y.begin(), y.end(), ly.begin(), [](double v) { return std::log(v); });
  return polyfit(lx, ly, 1)(1);
}

double fitted_order(std::span<const double> x, std::span<const double> y, double floor) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > floor) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  }
  if (xs.size() < 2) return kInf;
  return loglog_slope(xs, ys);
}

ComplexVector eigenvalues(const Matrix& m) {
  Eigen::EigenSolver<Matrix> solver(m, false);
  return solver.eigenvalues();
}

double spectral_distance(const ComplexVector& a, const ComplexVector& b) {
  if (a.size() != b.size()) throw InvalidArgument("spectral_distance: size mismatch");
  const auto n = static_cast<int>(a.size());
  if (n == 0) return 0.0;
  if (n <= 6) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = kInf;
    do {
      double worst = 0.0;
      for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(a(i) - b(perm[i])));
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<bool> used_a(n, false);
  std::vector<bool> used_b(n, false);
  double worst = 0.0;
  for (int round = 0; round < n; ++round) {
    double best = kInf;
    int bi = -1;
    int bj = -1;
    for (int i = 0; i < n; ++i) {
      if (used_a[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (used_b[j]) continue;
        const double d = std::abs(a(i) - b(j));
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    used_a[bi] = true;
    used_b[bj] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

double spectral_radius(const Matrix& m) { return eigenvalues(m).cwiseAbs().maxCoeff(); }

double unit_circle_distance(const Matrix& m) {
  return (eigenvalues(m).cwiseAbs().array() - 1.0).abs().minCoeff();
}

namespace {

struct SimpsonContext {
  const std::function<Vector(double)>& f;
  int max_depth;
  int min_depth;
  long evaluations = 0;
  long max_evaluations = 1'000'000;
};

Vector simpson_step(SimpsonContext& ctx, double a, double b, const Vector& fa,
                    const Vector& fm, const Vector& fb, const Vector& whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  ctx.evaluations += 2;
  if (ctx.evaluations > ctx.max_evaluations) {
    throw QuadratureFailure("adaptive Simpson exceeded its evaluation budget");
  }
  const Vector flm = ctx.f(lm);
  const Vector frm = ctx.f(rm);
  const Vector left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Vector right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Vector delta = left + right - whole;
  if (depth >= ctx.min_depth && delta.cwiseAbs().maxCoeff() <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  if (depth >= ctx.max_depth) {
    throw QuadratureFailure("adaptive Simpson exceeded its refinement budget");
  }
  return simpson_step(ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

Vector integrate_simpson(const std::function<Vector(double)>& f, double a, double b, double tol,
                         int max_depth, int min_depth) {
  SimpsonContext ctx{f, max_depth, min_depth};
  const Vector fa = f(a);
  const Vector fb = f(b);
  const Vector fm = f(0.5 * (a + b));
  const Vector whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(ctx, a, b, fa, fm, fb, whole, tol, 0);
}

std::vector<double> logspace(double lo, double hi, int count) {
  if (count < 2 || lo <= 0.0 || hi <= lo) throw InvalidArgument("logspace: need 0 < lo < hi, count >= 2");
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace hybavg::numerics
