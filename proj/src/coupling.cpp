#include "mim/coupling.hpp"

#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <cmath>

#include "mim/constants.hpp"
#include "mim/error.hpp"

namespace mim {

std::string_view to_string(Regime r) { return r == Regime::linear ? "linear" : "quadratic"; }

double bare_coupling(const CavityGeometry& geom, Mode n) {
  return reference_frequency(geom, n) / geom.length;
}

double default_quadratic_window(const CavityGeometry& geom, Mode n) { return n.wavelength(geom) / 100.0; }

Regime coupling_regime(const CavityGeometry& geom, Mode n, double q0, double window) {
  if (!(window > 0.0)) throw Error(ErrorCode::invalid_argument, "quadratic window must be positive");
  const double quarter = n.wavelength(geom) / 4.0;
  const double phase = quarter_wave_phase(geom, n, q0);  // q0 in units of lambda/4
  const double distance = std::abs(phase - std::round(phase)) * quarter;
  return distance < window ? Regime::quadratic : Regime::linear;
}

Regime coupling_regime(const CavityGeometry& geom, Mode n, double q0) {
  return coupling_regime(geom, n, q0, default_quadratic_window(geom, n));
}

namespace {

void require_linear(const CavityGeometry& geom, Mode n, double q0, double window) {
  if (coupling_regime(geom, n, q0, window) == Regime::quadratic)
    throw Error(ErrorCode::wrong_regime, "q0 lies inside the quadratic window of a quarter-wave point");
}

}  // namespace

LinearShifts linear_shifts(const CavityGeometry& geom, Mode n, double q0, double window) {
  geom.validate();
  require_linear(geom, n, q0, window);
  const double tau = geom.round_trip_time();
  const double amp = std::sqrt(1.0 - geom.transmissivity);
  const double moving = std::asin(amp * boost::math::cos_pi(quarter_wave_phase(geom, n, q0)));
  const double fixed = std::asin(amp);
  return {(fixed - moving) / tau, (kPi - fixed - moving) / tau};
}

LinearShifts linear_shifts(const CavityGeometry& geom, Mode n, double q0) {
  return linear_shifts(geom, n, q0, default_quadratic_window(geom, n));
}

double linear_coupling_profile(const CavityGeometry& geom, Mode n, double q0) {
  geom.validate();
  const double phase = quarter_wave_phase(geom, n, q0);
  const double s = boost::math::sin_pi(phase);
  if (s == 0.0) return 0.0;
  const double T = geom.transmissivity;
  if (T == 1.0) return 0.0;
  // 1/(1-T) - c^2 = s^2 + T/(1-T), which avoids cancellation for small T.
  return bare_coupling(geom, n) * s / std::sqrt(s * s + T / (1.0 - T));
}

double linear_coupling(const CavityGeometry& geom, Mode n, double q0, double window) {
  require_linear(geom, n, q0, window);
  return linear_coupling_profile(geom, n, q0);
}

double linear_coupling(const CavityGeometry& geom, Mode n, double q0) {
  return linear_coupling(geom, n, q0, default_quadratic_window(geom, n));
}

double quadratic_detuning(const CavityGeometry& geom) {
  geom.validate();
  return 2.0 / geom.round_trip_time() * std::acos(std::sqrt(1.0 - geom.transmissivity));
}

double quadratic_coupling(const CavityGeometry& geom, Mode n) {
  geom.validate();
  const double T = geom.transmissivity;
  if (T == 0.0) throw Error(ErrorCode::divergent_coupling, "xi_Q diverges at T = 0 (sharp crossing)");
  const double xi = bare_coupling(geom, n);
  return 0.5 * geom.round_trip_time() * xi * xi * std::sqrt((1.0 - T) / T);
}

CouplingConstants coupling_constants(const CavityGeometry& geom, Mode n, double q0, double window) {
  CouplingConstants c;
  c.xi = bare_coupling(geom, n);
  c.Delta_o = quadratic_detuning(geom);
  if (geom.transmissivity > 0.0) c.xi_Q = quadratic_coupling(geom, n);
  c.regime = coupling_regime(geom, n, q0, window);
  if (c.regime == Regime::linear) {
    const LinearShifts s = linear_shifts(geom, n, q0, window);
    c.delta_e = s.even;
    c.delta_o = s.odd;
    c.xi_L = linear_coupling_profile(geom, n, q0);
  }
  return c;
}

CouplingConstants coupling_constants(const CavityGeometry& geom, Mode n, double q0) {
  return coupling_constants(geom, n, q0, default_quadratic_window(geom, n));
}

CouplingSweep coupling_sweep(const CavityGeometry& geom, Mode n, const std::vector<double>& transmissivities,
                             const std::vector<double>& q0_grid) {
  CouplingSweep out;
  for (double T : transmissivities) {
    CavityGeometry g = geom;
    g.transmissivity = T;
    g.validate();
    for (double q0 : q0_grid) out.linear.push_back({T, q0, linear_coupling_profile(g, n, q0)});
    if (T > 0.0) out.quadratic.push_back({T, quadratic_detuning(g), quadratic_coupling(g, n)});
  }
  return out;
}

}  // namespace mim
