#pragma once

#include "hybavg/settings.hpp"
#include "hybavg/system.hpp"
#include "hybavg/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace hybavg {

/// Vertical hopper in phase-energy coordinates: a sin(theta) = z0 - z,
/// a omega cos(theta) = -zdot.
struct HopperParams {
  double omega = 50.0;  // stance angular frequency, rad/s
  double k = 0.4;       // energization gain, N s / m^2
  double beta = 10.0;   // viscous drag, N / (m/s)
  double g = 9.81;      // m/s^2
  double eps = 2.0;     // operating time-scale parameter
  double z0 = 0.17;     // nominal leg length, m

  /// Throws InvalidParams unless every field is positive and eps < omega.
  void validate() const;
};

/// Phase interval half-width: the chart is (-Psi, Psi) with Psi = 2 pi - 0.05.
inline constexpr double kHopperPhaseHalfWidth = 6.2331853071795862;

HybridSystemDef make_vertical_hopper(const HopperParams& p);

struct HopperOracles {
  double a_star = 0.0;
  double Dfbar = 0.0;
  double S1 = 0.0;
  double W = 0.0;
  double fbar(double a) const { return (k - a * beta) / (2.0 * omega); }
  double DRbar(double eps) const { return 1.0 + eps * S1; }
  /// First-order averaged return-map derivative S0 + eps (S1 + pi Df_bar).
  double DPbar(double eps) const { return 1.0 + eps * W; }
  /// a(s) for a' = eps f_bar(a) after phase span s.
  double averaged_a(double a0, double eps, double s) const;

  double omega = 0.0, k = 0.0, beta = 0.0;
};

HopperOracles hopper_oracles(const HopperParams& p);

enum class HopperMode { stance, flight };

struct PhysicalTrajectory {
  std::vector<double> times;
  std::vector<double> z;
  std::vector<double> zdot;
  std::vector<HopperMode> mode;
  std::vector<double> theta;  // phase in stance; 0 in flight
  std::vector<double> a;      // energy coordinate; touchdown value in flight
  std::vector<int> stride;
  std::vector<double> touchdown_times;  // n_strides + 1 entries
  std::vector<double> touchdown_a;      // a at each touchdown, starting with a_init
  std::vector<double> liftoff_times;
  std::vector<double> stance_durations;
  std::vector<double> liftoff_z;
  std::vector<double> liftoff_zdot;
};

/// Stance integrated in (z, zdot), liftoff located where the guard vanishes,
/// ballistic flight solved in closed form. Starts at touchdown with
/// zdot = -omega a_init.
PhysicalTrajectory simulate_physical_hopper(const HopperParams& p, double a_init, int n_strides,
                                            const Settings& s = {});

/// (theta, a) <-> (z, zdot)
std::pair<double, double> hopper_to_phase_energy(const HopperParams& p, double z, double zdot);
std::pair<double, double> hopper_to_physical(const HopperParams& p, double theta, double a);

struct ResidualSeries {
  std::vector<int> stride;
  std::vector<double> a_hybrid;    // a at each touchdown
  std::vector<double> a_averaged;  // averaged flow after the same number of phase periods
  std::vector<double> residual;    // a_hybrid - a_averaged
  double max_abs_residual = 0.0;
  PhysicalTrajectory trajectory;
  std::vector<double> a_averaged_dense;  // averaged a at each trajectory sample
};

ResidualSeries residual_vs_averaged(const HopperParams& p, double a_init, int n_strides,
                                    const Settings& s = {});

/// x' = (1, -eps x2), guard {x1*} x R, R = (0, x2 + eps x1* x2), anchor (x1*, 0).
HybridSystemDef make_nonhyperbolic_example(double x1_star);

/// Identity reset on {2 pi} x X2 with F2 = -x2 + sin(x1) + cos(x1) x2^2.
HybridSystemDef make_classical_example();

/// Named models with a flat numeric parameter schema.
struct ModelInfo {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, double>> params;  // name, default
};

const std::vector<ModelInfo>& model_catalog();
const ModelInfo& model_info(const std::string& name);  // throws InvalidArgument

struct BuiltModel {
  SystemHandle system;
  std::map<std::string, double> params;  // defaults merged with overrides
  double eps = 0.0;                      // operating eps
};

/// Builds a catalog model. Unknown names or parameter keys throw
/// InvalidArgument; out-of-range values throw InvalidParams.
BuiltModel build_model(const std::string& name, const std::map<std::string, double>& overrides,
                       const Settings& s = {});

HopperParams hopper_params_from(const std::map<std::string, double>& params);

/// Registry preloaded with every catalog model at default parameters.
Registry& default_registry();

}  // namespace hybavg
