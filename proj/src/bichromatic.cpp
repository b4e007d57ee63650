#include "mim/bichromatic.hpp"

#include <boost/math/special_functions/cos_pi.hpp>
#include <cmath>

#include "mim/constants.hpp"
#include "mim/error.hpp"

namespace mim {

BichromaticDesign design(const CavityGeometry& geom, const MechanicalOscillator& mech, double lambda_d,
                         const BichromaticOptions& opts) {
  geom.validate();
  mech.validate();
  if (!(lambda_d > 0.0)) throw Error(ErrorCode::invalid_argument, "lambda_d must be positive");
  const Mode damp = Mode::at_wavelength(geom, lambda_d);
  if (damp.order() < 1e3)
    throw Error(ErrorCode::design_infeasible, "damp mode order " + std::to_string(damp.order()) + " is below 1000");

  BichromaticDesign d;
  d.lambda_d = lambda_d;
  d.lambda_t = opts.lambda_t ? *opts.lambda_t : (1.0 - 2.0 * opts.offset_fraction) * lambda_d;
  if (!(d.lambda_t > 0.0)) throw Error(ErrorCode::invalid_argument, "lambda_t must be positive");
  const Mode trap = Mode::at_wavelength(geom, d.lambda_t);
  d.trap_order = trap.order();
  d.damp_order = damp.order();
  d.q0 = -0.5 * d.lambda_t;
  d.offset = d.q0 + 0.5 * lambda_d;

  const double gamma = geom.decay_rate();
  d.mode_separation = std::abs(trap.frequency(geom) - damp.frequency(geom));
  d.separation_ratio = d.mode_separation / gamma;
  if (!(d.separation_ratio > opts.separation_threshold))
    throw Error(ErrorCode::design_infeasible, "trap and damp modes are separated by only " +
                                                  std::to_string(d.separation_ratio) + " linewidths");

  d.trap_regime = coupling_regime(geom, trap, d.q0, opts.window_fraction * d.lambda_t);
  d.damp_regime = coupling_regime(geom, damp, d.q0, opts.window_fraction * lambda_d);
  if (d.trap_regime != Regime::quadratic)
    throw Error(ErrorCode::placement, "q0 is not at a quarter-wave point of the trap mode");
  if (boost::math::cos_pi(quarter_wave_phase(geom, trap, d.q0)) != 1.0)
    throw Error(ErrorCode::placement, "q0 is not a minimum of the trap mode's odd branch");
  if (d.damp_regime != Regime::linear)
    throw Error(ErrorCode::placement, "the damp mode is quadratic at q0");

  d.xi_Q_trap = quadratic_coupling(geom, trap);
  d.xi_L_damp = linear_coupling_profile(geom, damp, d.q0);
  if (std::abs(d.xi_L_damp) < 1e-6 * bare_coupling(geom, damp))
    throw Error(ErrorCode::design_infeasible, "the damp mode has no linear coupling at q0");

  d.trap_drive = opts.trap;
  d.trap_drive.branch = Branch::odd;
  d.damp_drive = {opts.damp_power, opts.damp_detuning_over_gamma * gamma, Branch::even};

  const double window = opts.window_fraction * d.lambda_t;
  d.swept_q0 = d.q0;
  d.swept_xi_L = d.xi_L_damp;
  for (int i = 0; i < opts.sweep_points; ++i) {
    const double q = d.q0 - window + 2.0 * window * i / std::max(1, opts.sweep_points - 1);
    if (coupling_regime(geom, trap, q, window) != Regime::quadratic) continue;
    const double x = linear_coupling_profile(geom, damp, q);
    if (std::abs(x) > std::abs(d.swept_xi_L)) {
      d.swept_xi_L = x;
      d.swept_q0 = q;
    }
  }

  CouplingConstants c;
  c.xi_Q = d.xi_Q_trap;
  d.trap_frequency = max_trap_frequency(geom, trap, mech, d.trap_drive, c);
  return d;
}

HybridPerformance combined_performance(const BichromaticDesign& d, const CavityGeometry& geom,
                                       const MechanicalOscillator& mech) {
  const Mode trap = Mode::at_wavelength(geom, d.lambda_t);
  const Mode damp = Mode::at_wavelength(geom, d.lambda_d);
  CouplingConstants trap_c;
  trap_c.xi_Q = d.xi_Q_trap;
  CouplingConstants damp_c;
  damp_c.xi_L = d.xi_L_damp;

  HybridPerformance out;
  const EffectiveResponse trap_resp = effective_params_quadratic(geom, trap, mech, d.trap_drive, trap_c);
  out.omega_eff = trap_resp.omega_eff(0.0);
  out.trap_damping = trap_resp.damping(0.0) - mech.damping;

  EffectiveResponse resp = trap_resp;
  const EffectiveResponse damp_resp = effective_params_linear(geom, damp, mech, d.damp_drive, damp_c);
  for (const auto& b : damp_resp.beams()) resp.add_linear_beam(b);
  out.damping = resp.damping(out.omega_eff);
  out.T_eff = mech.damping / out.damping * mech.bath_temperature;
  out.n_M = occupation(out.T_eff, out.omega_eff);

  const SteadyState ss = steady_state_quadratic(geom, trap, mech, d.trap_drive);
  out.trap_stability = stability(fluctuation_matrix(geom, mech, d.trap_drive, d.xi_Q_trap, ss));
  out.damp_stability = stability(linear_drift_matrix(geom, damp, mech, d.damp_drive, d.xi_L_damp));
  const double trap_spring = quadratic_stiffness(mech, d.xi_Q_trap, ss) - mech.mass * mech.omega_M * mech.omega_M;
  out.combined_stability =
      stability(linear_drift_matrix(geom, damp, mech, d.damp_drive, d.xi_L_damp, trap_spring));
  if (!out.combined_stability.stable)
    throw Error(ErrorCode::unstable_design, "the linearized two-beam system is unstable");
  return out;
}

DampingComparison damping_comparison(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                     double xi_L, const DriveField& linear_trap, const DriveField& cooling,
                                     double probe_omega) {
  CouplingConstants c;
  c.xi_L = xi_L;
  const EffectiveResponse cool = effective_params_linear(geom, n, mech, cooling, c);
  const EffectiveResponse trap = effective_params_linear(geom, n, mech, linear_trap, c);
  DampingComparison r;
  r.cooling_part = cool.damping(probe_omega) - mech.damping;
  r.trap_part = trap.damping(probe_omega) - mech.damping;
  r.hybrid = mech.damping + r.cooling_part;
  r.linear_only = r.hybrid + r.trap_part;
  r.ratio = r.hybrid / r.linear_only;
  return r;
}

}  // namespace mim
