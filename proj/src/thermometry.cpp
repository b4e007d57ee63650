#include "mim/thermometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "mim/constants.hpp"
#include "mim/error.hpp"

namespace mim {

std::complex<double> susceptibility_at(const EffectiveResponse& resp, double omega) {
  const std::complex<double> inv(resp.mass() * (resp.omega_eff_sq(omega) - omega * omega),
                                 -resp.damping(omega) * omega);
  return 1.0 / inv;
}

double variance_integral_analytic(double mass, double omega_eff, double damping) {
  if (!(damping > 0.0)) throw Error(ErrorCode::divergent_integral, "D_eff <= 0: the Lorentzian has no finite area");
  if (!(mass > 0.0) || !(omega_eff > 0.0))
    throw Error(ErrorCode::degenerate_parameters, "mass and omega_eff must be positive");
  return kPi / (mass * omega_eff * omega_eff * damping);
}

namespace {

double chi_sq(const EffectiveResponse& resp, double omega) {
  const double re = resp.mass() * (resp.omega_eff_sq(omega) - omega * omega);
  const double im = resp.damping(omega) * omega;
  return 1.0 / (re * re + im * im);
}

// Positive frequencies where omega_eff^2(omega) = omega^2, found on a log grid.
std::vector<double> resonances(const EffectiveResponse& resp) {
  std::vector<double> out;
  if (resp.is_constant()) {
    const double w2 = resp.constant_omega_eff_sq();
    if (w2 > 0.0) out.push_back(std::sqrt(w2));
    return out;
  }
  double hi = std::sqrt(std::abs(resp.constant_omega_eff_sq()));
  for (const auto& b : resp.beams()) hi = std::max({hi, std::abs(b.detuning), b.gamma});
  hi *= 1e3;
  double lo = hi * 1e-12;
  auto g = [&](double w) { return resp.omega_eff_sq(w) - w * w; };
  const int steps = 4000;
  const double ratio = std::pow(hi / lo, 1.0 / steps);
  double a = lo;
  double ga = g(a);
  for (int i = 0; i < steps; ++i) {
    const double b = a * ratio;
    const double gb = g(b);
    if ((ga > 0.0) != (gb > 0.0)) {
      double l = a, r = b;
      for (int k = 0; k < 200 && r - l > 1e-15 * r; ++k) {
        const double mid = 0.5 * (l + r);
        if ((g(mid) > 0.0) == (ga > 0.0)) l = mid; else r = mid;
      }
      out.push_back(0.5 * (l + r));
    }
    a = b;
    ga = gb;
  }
  return out;
}

}  // namespace

QuadratureResult variance_integral_numeric(const EffectiveResponse& resp, const QuadratureConfig& cfg) {
  if (resp.is_constant() && !(resp.bare_damping() > 0.0))
    throw Error(ErrorCode::divergent_integral, "D_eff <= 0: the Lorentzian has no finite area");
  const std::vector<double> peaks = resonances(resp);

  double scale = std::sqrt(std::abs(resp.constant_omega_eff_sq()));
  for (double p : peaks) scale = std::max(scale, p);
  if (!(scale > 0.0)) throw Error(ErrorCode::degenerate_parameters, "no frequency scale for the integration window");
  double W = cfg.initial_window * scale;

  std::vector<double> cuts{0.0, W};
  for (double p : peaks) {
    const double width = std::max(std::abs(resp.damping(p)) / resp.mass(), 1e-12 * p);
    cuts.push_back(p);
    for (double s = width; s < W; s *= 4.0) {
      cuts.push_back(p - s);
      cuts.push_back(p + s);
    }
  }
  for (const auto& b : resp.beams()) {
    cuts.push_back(std::abs(b.detuning));
    cuts.push_back(0.5 * b.gamma);
  }
  std::erase_if(cuts, [&](double c) { return !(c >= 0.0 && c <= W); });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto f = [&](double w) { return chi_sq(resp, w); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  QuadratureResult r;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    r.value += GK::integrate(f, cuts[i], cuts[i + 1], 10, cfg.segment_tolerance, &err);
    r.error_estimate += err;
  }
  for (;;) {
    double err = 0.0;
    const double shell = GK::integrate(f, W, 2.0 * W, 10, cfg.segment_tolerance, &err);
    r.value += shell;
    r.error_estimate += err;
    W *= 2.0;
    if (std::abs(shell) < cfg.tail_tolerance * std::abs(r.value)) break;
    if (++r.doublings >= cfg.max_doublings || !std::isfinite(r.value))
      throw Error(ErrorCode::integration_failure, "integration window did not converge");
  }
  if (!std::isfinite(r.value)) throw Error(ErrorCode::integration_failure, "non-finite integral");
  r.value *= 2.0;  // even integrand
  r.error_estimate *= 2.0;
  r.window = W;
  return r;
}

double effective_temperature(double mass, double omega_eff, double noise_strength, double integral) {
  return mass * omega_eff * omega_eff * noise_strength * integral / (2.0 * kPi * kBoltzmann);
}

double occupation(double temperature, double omega_eff) {
  if (!(omega_eff > 0.0)) throw Error(ErrorCode::degenerate_parameters, "omega_eff must be positive");
  return kBoltzmann * temperature / (kHbar * omega_eff);
}

double thermal_force_spectrum(double damping, double bath_temperature, double omega) {
  if (omega == 0.0) return 2.0 * damping * kBoltzmann * bath_temperature;
  const double x = kHbar * omega / (2.0 * kBoltzmann * bath_temperature);
  return damping * kHbar * omega * (1.0 + 1.0 / std::tanh(x));
}

namespace {

struct Polys {
  double a;      // gamma^2 + 4 delta^2
  double b;      // 16 w^4 + 8 w^2 (gamma^2 - 4 delta^2) + (gamma^2 + 4 delta^2)^2
  double c;      // 16 w^4 - 3 gamma^4 - 8 gamma^2 delta^2 + 16 delta^4 - 8 w^2 (gamma^2 + 4 delta^2)
};

Polys polys(const TaylorParams& p) {
  const double w2 = p.omega_M * p.omega_M;
  const double g2 = p.gamma * p.gamma;
  const double d2 = p.detuning * p.detuning;
  Polys r;
  r.a = g2 + 4.0 * d2;
  r.b = 16.0 * w2 * w2 + 8.0 * w2 * (g2 - 4.0 * d2) + r.a * r.a;
  r.c = 16.0 * w2 * w2 - 3.0 * g2 * g2 - 8.0 * g2 * d2 + 16.0 * d2 * d2 - 8.0 * w2 * r.a;
  if (r.a == 0.0 || r.b == 0.0)
    throw Error(ErrorCode::degenerate_parameters, "vanishing denominator in the Taylor coefficients");
  return r;
}

}  // namespace

TaylorCoefficients taylor_coefficients(const TaylorParams& p) {
  const Polys q = polys(p);
  const double w2 = p.omega_M * p.omega_M;
  TaylorCoefficients t;
  t.V = p.V;
  t.optical_part = -16.0 * p.V * p.detuning * (-4.0 * w2 + q.a) / (q.a * q.b);
  t.omega_eff_sq = w2 + t.optical_part;
  t.slope = -128.0 * p.V * p.omega_M * p.detuning * q.c / (q.a * q.b * q.b);
  return t;
}

CriticalFrequency critical_frequency(const TaylorParams& p) {
  if (!(p.omega_M > 0.0)) throw Error(ErrorCode::degenerate_parameters, "omega_M must be positive");
  const Polys q = polys(p);
  if (q.c == 0.0) throw Error(ErrorCode::degenerate_parameters, "the first-order Taylor coefficient vanishes");
  const double w2 = p.omega_M * p.omega_M;
  CriticalFrequency c;
  c.full = p.omega_M - (4.0 * w2 - q.a) * q.b / (8.0 * p.omega_M * q.c);
  const double r = p.detuning / p.omega_M;
  c.approx = p.omega_M * (1.0 + 0.5 * r * r);
  c.hierarchy_ok = std::abs(p.detuning) >= 0.5 * p.gamma && 0.5 * p.gamma >= 10.0 * p.omega_M;
  return c;
}

std::string_view to_string(IntegralMethod m) { return m == IntegralMethod::analytic ? "analytic" : "numeric"; }

ThermalSummary thermal_summary(const MechanicalOscillator& mech, const EffectiveResponse& resp,
                               IntegralMethod method, const QuadratureConfig& cfg) {
  mech.validate();
  ThermalSummary s;
  s.method = method;
  s.omega_eff = resp.omega_eff(mech.omega_M);
  s.damping = resp.damping(mech.omega_M);
  if (!(s.omega_eff > 0.0))
    throw Error(ErrorCode::degenerate_parameters, "negative effective spring: the mirror is not trapped");
  s.integral = method == IntegralMethod::analytic ? variance_integral_analytic(mech.mass, s.omega_eff, s.damping)
                                                  : variance_integral_numeric(resp, cfg).value;
  const double N = mech.thermal_noise_strength();
  s.variance = N * s.integral / (2.0 * kPi);
  s.T_eff = effective_temperature(mech.mass, s.omega_eff, N, s.integral);
  s.n_M = occupation(s.T_eff, s.omega_eff);
  s.omega_c = std::numeric_limits<double>::infinity();
  for (const auto& b : resp.beams())
    s.omega_c = std::min(s.omega_c, std::abs(critical_frequency({mech.omega_M, b.gamma, b.detuning, b.spring}).full));
  s.validity_ratio = s.omega_eff / s.omega_c;
  s.validity_ok = s.validity_ratio < 0.1;
  return s;
}

}  // namespace mim
