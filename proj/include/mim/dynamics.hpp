#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string_view>
#include <vector>

#include "mim/constants.hpp"
#include "mim/coupling.hpp"
#include "mim/modespectrum.hpp"

namespace mim {

struct MechanicalOscillator {
  double mass = 1e-9;                     // m [kg]
  double omega_M = hz_to_angular(2.5e3);  // bare angular frequency [rad/s]
  double damping = 2e-11;                 // D_M [kg/s]
  double bath_temperature = 300.0;  // T_e [K]
  double rest_position = 0.0;       // q0 [m]

  void validate() const;
  double quality_factor() const { return mass * omega_M / damping; }
  static double damping_from_quality(double mass, double omega_M, double quality) {
    return mass * omega_M / quality;
  }
  // N = 2 D_M k_B T_e, high-temperature force-noise intensity.
  double thermal_noise_strength() const;
};

struct DriveField {
  double power = 0.0;     // P_in [W]
  double detuning = 0.0;  // delta [rad/s]
  Branch branch = Branch::odd;

  void validate() const;
  // |f_in| = sqrt(P / (hbar omega_n)) [sqrt(photons/s)]
  double input_amplitude(double omega_n) const;
  // Intracavity |b_s|^2 = gamma f_in^2 / (delta^2 + gamma^2/4).
  double intracavity_photons(double omega_n, double gamma) const;
};

struct SteadyState {
  double q = 0.0;
  double p = 0.0;
  double b = 0.0;  // real, >= 0
};

// Single-mode quadratic configuration driven on the odd (trapping) branch.
// Refuses the even branch with antitrapping_configuration.
SteadyState steady_state_quadratic(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                   const DriveField& drive);

// Spring constant 2 hbar xi_Q b_s^2 + m omega_M^2 of the linearized mirror.
double quadratic_stiffness(const MechanicalOscillator& mech, double xi_Q, const SteadyState& ss);

// Right-hand side of the mirror force balance, -(hbar xi_Q |b_s(q)|^2 + m omega_M^2) q,
// with b_s(q) from the q-dependent detuning delta + xi_Q q^2.
double quadratic_static_force(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                              const DriveField& drive, double xi_Q, double q);

// (dX_b, dY_b, dq, dp)
Eigen::Matrix4d fluctuation_matrix(const CavityGeometry& geom, const MechanicalOscillator& mech,
                                   const DriveField& drive, double xi_Q, const SteadyState& ss);

// Two pumped modes with linear coupling: state (dX_a, dY_a, dX_b, dY_b, dq, dp).
// Both modes see detuning `drive.detuning` and power `drive.power`; the even mode
// couples with +xi_L, the odd mode with -xi_L. `extra_stiffness` adds a static
// spring (e.g. a quadratic trap beam) to the momentum row.
Eigen::MatrixXd linear_drift_matrix(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                    const DriveField& drive, double xi_L, double extra_stiffness = 0.0);

struct StabilityReport {
  std::vector<std::complex<double>> eigenvalues;
  double max_real_part = 0.0;
  bool stable = false;
  bool routh_hurwitz = false;
};

// Monic characteristic polynomial det(lambda I - M), highest power first.
std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& M);

// True iff every root of the polynomial has a strictly negative real part.
bool routh_hurwitz_stable(const std::vector<double>& coefficients);

// Osborne balancing with power-of-two factors: diag(s)^-1 M diag(s) has
// comparable row and column norms and the same eigenvalues as M.
Eigen::VectorXd balancing_scales(const Eigen::MatrixXd& M);

StabilityReport stability(const Eigen::MatrixXd& M);

class EffectiveResponse {
 public:
  enum class Kind { quadratic_constant, linear_frequency_dependent };

  // One linearly coupled drive, V in [s^-5].
  struct LinearBeam {
    double spring;   // V = 4 xi_L^2 gamma P / (m omega_n)
    double detuning; // delta [rad/s]
    double gamma;    // cavity decay rate [1/s]
  };

  EffectiveResponse(double mass, double omega_M, double damping);

  static EffectiveResponse constant(double mass, double omega_eff, double damping);

  void add_static_spring(double omega_sq) { static_spring_ += omega_sq; }
  void add_linear_beam(LinearBeam beam);

  Kind kind() const { return beams_.empty() ? Kind::quadratic_constant : Kind::linear_frequency_dependent; }
  bool is_constant() const { return beams_.empty(); }

  double mass() const { return mass_; }
  double bare_frequency() const { return omega_M_; }
  double bare_damping() const { return damping_; }
  double static_spring() const { return static_spring_; }
  const std::vector<LinearBeam>& beams() const { return beams_; }

  double omega_eff_sq(double omega) const;
  double damping(double omega) const;
  // sqrt(omega_eff_sq); NaN where the spring is negative.
  double omega_eff(double omega) const;

  // Frequency-independent parts only: omega_M^2 + static spring, and D_M.
  double constant_omega_eff_sq() const { return omega_M_ * omega_M_ + static_spring_; }

 private:
  double mass_;
  double omega_M_;
  double damping_;
  double static_spring_ = 0.0;
  std::vector<LinearBeam> beams_;
};

std::string_view to_string(EffectiveResponse::Kind k);

// omega_eff^2 = omega_M^2 + (2 xi_Q gamma P / m omega_n) / (delta^2 + gamma^2/4), D_eff = D_M.
EffectiveResponse effective_params_quadratic(const CavityGeometry& geom, Mode n,
                                             const MechanicalOscillator& mech, const DriveField& drive,
                                             const CouplingConstants& coupling);

struct TrapFrequencyReport {
  double omega_max;          // sqrt(omega_M^2 + 4 xi_Q P / (m omega_n gamma))
  double omega_eff_at_zero;  // delta -> 0 limit of the general-detuning formula
  double excess_ratio;       // (omega_eff_at_zero^2 - omega_M^2) / (omega_max^2 - omega_M^2)
  bool discrepancy;          // the two expressions disagree (they do by a factor 2)
};

TrapFrequencyReport max_trap_frequency(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                       const DriveField& drive, const CouplingConstants& coupling);

// V = 4 xi_L^2 gamma P / (m omega_n) for one drive in the linear regime.
double linear_spring_prefactor(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                               const DriveField& drive, double xi_L);

// Bare response plus the frequency-dependent spring and damping of `drive`.
EffectiveResponse effective_params_linear(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                          const DriveField& drive, const CouplingConstants& coupling);

struct EffectiveSample {
  double omega;
  double omega_eff_sq;
  double damping;
};

EffectiveSample effective_params_linear(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                        const DriveField& drive, const CouplingConstants& coupling,
                                        double probe_omega);

}  // namespace mim
