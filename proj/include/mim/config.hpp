#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mim/bichromatic.hpp"
#include "mim/coupling.hpp"
#include "mim/dynamics.hpp"
#include "mim/langevin.hpp"
#include "mim/modespectrum.hpp"

namespace mim {

struct SpectrumOptions {
  std::vector<int> modes{10000};
  std::optional<double> q_min;  // default -lambda_n / 4 of the first mode
  std::optional<double> q_max;
  int q_points = 201;
  SpectrumMethod method = SpectrumMethod::closed_form;
};

struct CouplingSweepOptions {
  std::vector<double> transmissivities{1e-4, 1e-2, 0.1, 0.2, 0.5, 0.7};
  std::optional<double> q0_min;  // default -lambda_n / 2
  std::optional<double> q0_max;  // default +lambda_n / 2
  int q0_points = 401;
};

struct EffectiveOptions {
  double omega_min = 0.0;
  std::optional<double> omega_max;  // default 4 x the largest |detuning| or gamma
  int omega_points = 401;
};

struct SdeOptions {
  std::optional<double> dt;        // default: a period of omega_eff / 8 (exact) or the EM bound
  std::optional<double> duration;  // default: burn-in + four spectral segments
  int n_traj = 200;
  std::uint64_t seed = 1;
  std::optional<double> burn_in;   // default: 20 relaxation times
  Integrator integrator = Integrator::euler_maruyama;
  int threads = 1;
  long segment_length = 0;
  bool allow_unstable = false;
};

struct DesignOptions {
  std::optional<double> lambda_d;  // default: the configured mode's wavelength
  BichromaticOptions bichromatic;
  // Linear-only reference scheme for the damping comparison.
  DriveField reference_trap{5e-3, 0.0, Branch::even};
  double reference_trap_detuning_over_gamma = -2.5;
  std::optional<double> reference_q0;  // default -lambda_d/2 + offset_fraction * lambda_d
};

struct RunConfig {
  CavityGeometry geometry;
  MechanicalOscillator mechanics;
  int mode = 10000;
  Regime regime = Regime::quadratic;
  double window_fraction = 0.01;  // quadratic window in units of lambda_n
  std::vector<DriveField> drives{DriveField{8e-3, 0.0, Branch::odd}};
  SpectrumOptions spectrum;
  CouplingSweepOptions coupling;
  EffectiveOptions effective;
  SdeOptions sde;
  DesignOptions design;

  double quadratic_window() const;
};

// Canonical parameter set with the decay rate from the end-mirror transmissivity.
RunConfig default_config();

// Throws Error(config) on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace mim
