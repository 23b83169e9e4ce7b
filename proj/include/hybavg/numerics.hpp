#pragma once

#include "hybavg/settings.hpp"
#include "hybavg/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace hybavg::numerics {

using VectorMap = std::function<Vector(const Vector&)>;
using ScalarMap = std::function<double(const Vector&)>;

/// Central-difference Jacobian with step h = scale * max(1, ||x||).
Matrix jacobian_fd(const VectorMap& f, const Vector& x, double step_scale);

/// Central-difference gradient, same step rule.
Vector gradient_fd(const ScalarMap& f, const Vector& x, double step_scale);

/// Least-squares polynomial coefficients c_0..c_degree of y(x).
Vector polyfit(std::span<const double> x, std::span<const double> y, int degree);

/// Slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Order of a series that is expected to vanish like x^p: fits log-log on
/// the entries above `floor`. Returns +inf when fewer than two entries clear
/// the floor (the series is zero to working precision).
double fitted_order(std::span<const double> x, std::span<const double> y, double floor);

ComplexVector eigenvalues(const Matrix& m);

/// Bottleneck distance between two eigenvalue multisets: the smallest, over
/// all pairings, of the largest pairwise gap. Exhaustive for n <= 6, greedy
/// nearest-pair matching above that.
double spectral_distance(const ComplexVector& a, const ComplexVector& b);

double spectral_radius(const Matrix& m);

/// min_i | |lambda_i| - 1 |
double unit_circle_distance(const Matrix& m);

/// Adaptive Simpson quadrature of a vector-valued integrand on [a, b].
/// Absolute tolerance `tol` on the integral; throws QuadratureFailure when
/// the recursion exceeds `max_depth`.
Vector integrate_simpson(const std::function<Vector(double)>& f, double a, double b, double tol,
                         int max_depth, int min_depth);

std::vector<double> logspace(double lo, double hi, int count);

}  // namespace hybavg::numerics
