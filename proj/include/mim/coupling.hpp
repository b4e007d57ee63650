#pragma once

#include <string_view>
#include <vector>

#include "mim/modespectrum.hpp"

namespace mim {

enum class Regime { linear, quadratic };
std::string_view to_string(Regime r);

struct CouplingConstants {
  double xi = 0.0;        // omega_n / L [rad s^-1 m^-1]
  double xi_L = 0.0;      // signed linear coupling, zero in the quadratic regime
  double xi_Q = 0.0;      // [rad s^-1 m^-2], zero for T = 0
  double delta_e = 0.0;   // even-mode shift below omega_n [rad/s]
  double delta_o = 0.0;   // odd-mode shift above omega_n [rad/s]
  double Delta_o = 0.0;   // quadratic-regime odd-mode detuning [rad/s]
  Regime regime = Regime::linear;
};

double bare_coupling(const CavityGeometry& geom, Mode n);

// lambda_n / 100 unless the caller picks a different crossover width.
double default_quadratic_window(const CavityGeometry& geom, Mode n);

// Quadratic iff q0 lies strictly closer than `window` to a quarter-wave point.
Regime coupling_regime(const CavityGeometry& geom, Mode n, double q0, double window);
Regime coupling_regime(const CavityGeometry& geom, Mode n, double q0);

struct LinearShifts {
  double even;  // delta_e >= 0
  double odd;   // delta_o >= 0
};

// Both throw wrong_regime when q0 falls inside the quadratic window.
LinearShifts linear_shifts(const CavityGeometry& geom, Mode n, double q0, double window);
LinearShifts linear_shifts(const CavityGeometry& geom, Mode n, double q0);
double linear_coupling(const CavityGeometry& geom, Mode n, double q0, double window);
double linear_coupling(const CavityGeometry& geom, Mode n, double q0);

// xi sin 2kq0 / sqrt(1/(1-T) - cos^2 2kq0) at any q0, with no regime check.
// Exactly zero at quarter-wave points.
double linear_coupling_profile(const CavityGeometry& geom, Mode n, double q0);

double quadratic_detuning(const CavityGeometry& geom);
double quadratic_coupling(const CavityGeometry& geom, Mode n);  // divergent_coupling for T = 0

CouplingConstants coupling_constants(const CavityGeometry& geom, Mode n, double q0, double window);
CouplingConstants coupling_constants(const CavityGeometry& geom, Mode n, double q0);

struct LinearCouplingRow {
  double transmissivity;
  double q0;
  double xi_L;
};

struct QuadraticCouplingRow {
  double transmissivity;
  double Delta_o;
  double xi_Q;
};

struct CouplingSweep {
  std::vector<LinearCouplingRow> linear;
  std::vector<QuadraticCouplingRow> quadratic;
};

// xi_L(q0; T) over the grid and (Delta_o, xi_Q)(T). Transmissivities of zero
// are skipped in the quadratic table.
CouplingSweep coupling_sweep(const CavityGeometry& geom, Mode n, const std::vector<double>& transmissivities,
                             const std::vector<double>& q0_grid);

}  // namespace mim
