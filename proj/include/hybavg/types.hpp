#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace hybavg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Interval with explicit endpoints. Whether the ends are open is decided by
/// the caller (phase intervals are open, epsilon ranges are half-open).
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains_open(double v) const { return v > lo && v < hi; }
  bool contains_half_open(double v) const { return v >= lo && v < hi; }
};

/// Point of X = X1 x X2: the phase coordinate and the slow coordinates.
struct StateX {
  double x1 = 0.0;
  Vector x2;

  StateX() = default;
  StateX(double phase, Vector slow) : x1(phase), x2(std::move(slow)) {}

  Eigen::Index dim() const { return x2.size() + 1; }

  Vector packed() const {
    Vector v(dim());
    v(0) = x1;
    v.tail(x2.size()) = x2;
    return v;
  }

  static StateX unpack(const Vector& v) { return {v(0), v.tail(v.size() - 1)}; }
};

/// Result of flowing a state to the guard.
struct EventCrossing {
  double tau = 0.0;
  StateX state_at_crossing;
  double transversality = 0.0;  // D(gamma) . F at the crossing
  bool converged = false;
};

/// Epsilon expansion D Rbar(x2*) = S0 + eps S1 + O(eps^2), extracted
/// numerically.
struct TaylorResetExpansion {
  Matrix S0;
  Matrix S1;
  Matrix S2;  // quadratic coefficient of the fit, reported for diagnostics
  double residual_order = kInf;  // +inf when the remainder sits below the noise floor
  double S0_constancy_defect = 0.0;
  double fit_residual = 0.0;
  std::vector<double> eps_grid;
  std::vector<double> remainder_norms;
  std::vector<Vector> x2_samples;
  double sample_radius = 0.0;
};

enum class Verdict { stable, unstable_or_inconclusive, not_orthogonal, degenerate_W };

std::string to_string(Verdict v);

/// Orthogonal-reset stability certificate.
struct StabilityCertificate {
  Matrix W;                // S0*S1 + x1* Df_bar (defining form, used for the verdict)
  Matrix W_first_order;    // S1 + x1* S0 Df_bar (form appearing in the return-map expansion)
  bool W_forms_disagree = false;
  std::string W_form_used = "S0*S1 + x1*Df_bar";
  Vector symmetric_part_eigs;  // ascending eigenvalues of W + W^T
  double S0_orthogonality_defect = 0.0;
  double W_min_singular_value = 0.0;
  bool jordan_ok = true;       // unity eigenvalues of S0 have diagonal Jordan blocks
  int unity_eigenvalue_count = 0;
  Verdict verdict = Verdict::unstable_or_inconclusive;
};

/// Per-epsilon comparison of the full and averaged return-map linearizations.
struct SweepPoint {
  double eps = 0.0;
  bool ok = false;
  std::string failure;      // empty when ok
  bool non_isolated = false;  // fixed point not hyperbolic at order eps
  Vector fixed_point;
  double fp_residual = 0.0;
  double eig_gap = 0.0;
  double drift = 0.0;
  double spectral_radius = 0.0;
  double unit_circle_distance = 0.0;
  Matrix full_jacobian;
  Matrix averaged_jacobian;
};

struct SweepReport {
  std::vector<double> eps_values;
  std::vector<double> eig_gaps;
  std::vector<double> fixed_point_drifts;
  std::vector<SweepPoint> points;
  double fitted_gap_order = 0.0;
  double fitted_drift_order = 0.0;
  bool gap_exact = false;    // every gap below the noise floor
  bool drift_exact = false;  // every drift below the noise floor
  // Log-log order of min ||lambda| - 1| over the sweep: 1 when the
  // linearization leaves the unit circle at order eps, 2 or more otherwise.
  double hyperbolicity_order = 0.0;
  bool hyperbolic_at_order_eps = true;
  double continuation_constant = 0.0;  // max |rho(e_{i+1}) - rho(e_i)| / (e_{i+1} - e_i)
  double stable_below_eps = 0.0;       // largest swept eps with spectral radius < 1 up to it
  double quadratic_model_max_eps = 0.0;
  double gap_constant = 0.0;           // C in gap ~ C eps^2, from the smallest points
};

}  // namespace hybavg
