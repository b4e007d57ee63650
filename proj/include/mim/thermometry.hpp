#pragma once

#include <complex>
#include <string_view>

#include "mim/dynamics.hpp"

namespace mim {

// chi^-1(omega) = m (omega_eff^2(omega) - omega^2) - i D_eff(omega) omega
std::complex<double> susceptibility_at(const EffectiveResponse& resp, double omega);

// Integral of |chi|^2 over the real line for constant parameters: pi / (m omega_eff^2 D_eff).
// Throws divergent_integral for D_eff <= 0.
double variance_integral_analytic(double mass, double omega_eff, double damping);

struct QuadratureConfig {
  double initial_window = 20.0;     // in units of the largest resonance frequency
  double tail_tolerance = 1e-9;     // stop doubling once the new shell adds less than this, relative
  double segment_tolerance = 1e-11; // Gauss-Kronrod relative tolerance per segment
  int max_doublings = 64;
};

struct QuadratureResult {
  double value = 0.0;
  double window = 0.0;    // final half-width W of [-W, W]
  double error_estimate = 0.0;
  int doublings = 0;
};

QuadratureResult variance_integral_numeric(const EffectiveResponse& resp, const QuadratureConfig& cfg = {});

// k_B T_eff = m omega_eff^2 <dq^2>, with <dq^2> = (N / 2 pi) * integral.
double effective_temperature(double mass, double omega_eff, double noise_strength, double integral);

double occupation(double temperature, double omega_eff);

// D_M hbar omega [1 + coth(hbar omega / 2 k_B T_e)], the full thermal force spectrum.
// Tends to 2 D_M k_B T_e for hbar omega << k_B T_e.
double thermal_force_spectrum(double damping, double bath_temperature, double omega);

struct TaylorParams {
  double omega_M;
  double gamma;
  double detuning;
  double V;  // 4 xi gamma P / (m L)
};

struct TaylorCoefficients {
  double V;
  double omega_eff_sq;  // omega_eff^2(omega_M), including omega_M^2
  double optical_part;  // the same without omega_M^2
  double slope;         // d(omega_M)
};

TaylorCoefficients taylor_coefficients(const TaylorParams& p);

struct CriticalFrequency {
  double full;
  double approx;      // omega_M [1 + (delta/omega_M)^2 / 2]
  bool hierarchy_ok;  // |delta| >= gamma/2 and gamma/2 >= 10 omega_M
};

CriticalFrequency critical_frequency(const TaylorParams& p);

enum class IntegralMethod { analytic, numeric };
std::string_view to_string(IntegralMethod m);

struct ThermalSummary {
  double omega_eff;      // at omega_M for frequency-dependent responses
  double damping;        // D_eff at omega_M
  double integral;
  double variance;       // <dq^2> [m^2]
  double T_eff;
  double n_M;
  double omega_c;        // smallest |critical frequency| over the linear beams; inf if none
  double validity_ratio; // omega_eff / omega_c
  bool validity_ok;      // ratio < 0.1
  IntegralMethod method;
};

ThermalSummary thermal_summary(const MechanicalOscillator& mech, const EffectiveResponse& resp,
                               IntegralMethod method = IntegralMethod::analytic,
                               const QuadratureConfig& cfg = {});

}  // namespace mim
