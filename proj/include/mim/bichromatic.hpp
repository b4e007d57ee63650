#pragma once

#include "mim/coupling.hpp"
#include "mim/dynamics.hpp"
#include "mim/thermometry.hpp"

namespace mim {

struct BichromaticOptions {
  double offset_fraction = 0.1;     // (lambda_d - lambda_t) / 2 = offset_fraction * lambda_d
  std::optional<double> lambda_t;   // use this trap wavelength instead of the offset rule
  DriveField trap{8e-3, 0.0, Branch::odd};
  double damp_power = 10e-6;
  double damp_detuning_over_gamma = 0.5;
  double separation_threshold = 10.0;   // required mode separation / gamma
  double window_fraction = 0.01;        // quadratic window in units of the mode wavelength
  int sweep_points = 201;
};

struct BichromaticDesign {
  double lambda_t = 0.0;
  double lambda_d = 0.0;
  double q0 = 0.0;
  double offset = 0.0;             // q0 minus the damp mode's even-branch maximum at -lambda_d/2
  double mode_separation = 0.0;    // |omega_t - omega_d| [rad/s]
  double separation_ratio = 0.0;   // mode_separation / gamma
  double trap_order = 0.0;
  double damp_order = 0.0;
  DriveField trap_drive;
  DriveField damp_drive;
  Regime trap_regime = Regime::quadratic;
  Regime damp_regime = Regime::linear;
  double xi_Q_trap = 0.0;
  double xi_L_damp = 0.0;
  double swept_q0 = 0.0;           // q0 maximizing |xi_L| of the damp mode inside the trap's quadratic window
  double swept_xi_L = 0.0;
  TrapFrequencyReport trap_frequency{};
};

BichromaticDesign design(const CavityGeometry& geom, const MechanicalOscillator& mech, double lambda_d,
                         const BichromaticOptions& opts = {});

struct HybridPerformance {
  double omega_eff = 0.0;
  double damping = 0.0;
  double trap_damping = 0.0;  // exactly zero: the quadratic trap adds no damping
  double T_eff = 0.0;
  double n_M = 0.0;
  StabilityReport trap_stability;
  StabilityReport damp_stability;
  StabilityReport combined_stability;
};

HybridPerformance combined_performance(const BichromaticDesign& d, const CavityGeometry& geom,
                                       const MechanicalOscillator& mech);

// Damping with and without a linear trap beam's contribution, both evaluated
// at `probe_omega`: the improvement from replacing the linear trap by a
// quadratic one.
struct DampingComparison {
  double linear_only;  // D_M + cooling + linear trap
  double hybrid;       // D_M + cooling
  double ratio;        // hybrid / linear_only
  double cooling_part;
  double trap_part;
};

DampingComparison damping_comparison(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                     double xi_L, const DriveField& linear_trap, const DriveField& cooling,
                                     double probe_omega);

}  // namespace mim
