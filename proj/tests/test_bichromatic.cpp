#include <doctest.h>

#include <cmath>

#include "mim/bichromatic.hpp"
#include "mim/constants.hpp"
#include "mim/error.hpp"

using namespace mim;

namespace {

CavityGeometry geometry() {
  CavityGeometry g;
  g.length = 5e-3;
  g.transmissivity = 1e-4;
  g.end_transmissivity = 1e-5;
  return g;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::config;
}

}  // namespace

TEST_CASE("design wavelengths and placement") {
  const CavityGeometry g = geometry();
  const MechanicalOscillator mech;
  for (double lambda_d : {1e-6, 1.064e-6, 780e-9, 1.55e-6}) {
    const BichromaticDesign d = design(g, mech, lambda_d);
    CAPTURE(lambda_d);
    CHECK(d.lambda_t == 0.8 * lambda_d);
    CHECK(d.q0 == -0.5 * d.lambda_t);
    CHECK(d.offset == doctest::Approx(lambda_d / 10.0).epsilon(1e-12));
    CHECK(d.trap_regime == Regime::quadratic);
    CHECK(d.damp_regime == Regime::linear);
    CHECK(d.separation_ratio > 10.0);
    CHECK(d.mode_separation == doctest::Approx(std::abs(kTwoPi * 299792458.0 / d.lambda_t -
                                                        kTwoPi * 299792458.0 / lambda_d)));
    CHECK(d.trap_drive.branch == Branch::odd);
    CHECK(d.xi_Q_trap > 0.0);
    CHECK(std::abs(d.xi_L_damp) > 0.5 * kPi * 299792458.0 * d.damp_order / g.length / g.length);
    CHECK(std::abs(d.swept_xi_L) >= std::abs(d.xi_L_damp));
    CHECK(std::abs(d.swept_q0 - d.q0) <= 0.01 * d.lambda_t);
    CHECK(d.trap_frequency.discrepancy);
    CHECK(d.trap_frequency.excess_ratio == doctest::Approx(2.0));
  }
}

TEST_CASE("design failure modes") {
  const CavityGeometry g = geometry();
  const MechanicalOscillator mech;
  SUBCASE("identical wavelengths leave no linear coupling") {
    BichromaticOptions o;
    o.lambda_t = 1e-6;
    CHECK(code_of([&] { design(g, mech, 1e-6, o); }) == ErrorCode::design_infeasible);
    o.offset_fraction = 0.0;
    o.lambda_t.reset();
    CHECK(code_of([&] { design(g, mech, 1e-6, o); }) == ErrorCode::design_infeasible);
  }
  SUBCASE("low-order damp mode") { CHECK(code_of([&] { design(g, mech, 2e-5); }) == ErrorCode::design_infeasible); }
  SUBCASE("modes too close for the cavity linewidth") {
    CavityGeometry wide = g;
    wide.decay_rate_override = 1e14;
    CHECK(code_of([&] { design(wide, mech, 1e-6); }) == ErrorCode::design_infeasible);
  }
  SUBCASE("trap wavelength off a quarter-wave point") {
    BichromaticOptions o;
    o.lambda_t = 0.81e-6;  // fine, q0 follows lambda_t
    CHECK_NOTHROW(design(g, mech, 1e-6, o));
    o.window_fraction = 1e-30;
    o.lambda_t = 0.8e-6 * (1.0 + 1e-3);
    CHECK_NOTHROW(design(g, mech, 1e-6, o));
  }
  SUBCASE("damp mode quadratic at the placement") {
    BichromaticOptions o;
    o.lambda_t = 0.5e-6;  // q0 = -lambda_d/4 sits on a damp-mode quarter-wave point
    CHECK(code_of([&] { design(g, mech, 1e-6, o); }) == ErrorCode::placement);
  }
  CHECK(code_of([&] { design(g, mech, -1.0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("combined performance") {
  CavityGeometry g = geometry();
  g.decay_rate_override = CavityGeometry::decay_rate_from_finesse(g.length, 1e5);
  const MechanicalOscillator mech;
  const BichromaticDesign d = design(g, mech, 1e-6);
  const HybridPerformance p = combined_performance(d, g, mech);
  CHECK(p.trap_damping == 0.0);
  // 8 mW on resonance gives a trap comparable to the two-beam linear scheme.
  CHECK(p.omega_eff / mech.omega_M > 100.0);
  CHECK(p.omega_eff / mech.omega_M < 3000.0);
  CHECK(design(geometry(), mech, 1e-6).trap_frequency.omega_eff_at_zero > 300.0 * mech.omega_M);
  CHECK(p.omega_eff == doctest::Approx(d.trap_frequency.omega_eff_at_zero));
  CHECK(p.damping > mech.damping);
  CHECK(p.T_eff == doctest::Approx(mech.bath_temperature * mech.damping / p.damping).epsilon(1e-14));
  CHECK(p.n_M == doctest::Approx(kBoltzmann * p.T_eff / (kHbar * p.omega_eff)).epsilon(1e-14));
  CHECK(p.trap_stability.stable);
  // The cooling beam alone softens the mirror past zero; the trap holds it.
  CHECK_FALSE(p.damp_stability.stable);
  CHECK(p.combined_stability.stable);

  SUBCASE("without trap light the scheme reduces to pure linear cooling") {
    BichromaticOptions o;
    o.trap.power = 0.0;
    o.damp_power = 1e-9;
    const BichromaticDesign dz = design(g, mech, 1e-6, o);
    const HybridPerformance pz = combined_performance(dz, g, mech);
    CHECK(pz.omega_eff == mech.omega_M);
    CouplingConstants c;
    c.xi_L = dz.xi_L_damp;
    const Mode damp = Mode::at_wavelength(g, dz.lambda_d);
    CHECK(pz.damping == doctest::Approx(effective_params_linear(g, damp, mech, dz.damp_drive, c, mech.omega_M).damping)
                            .epsilon(1e-14));
  }
  SUBCASE("narrow cavity lines make the cooling spring overwhelm the trap") {
    const CavityGeometry narrow = geometry();
    const BichromaticDesign dn = design(narrow, mech, 1e-6);
    CHECK(code_of([&] { combined_performance(dn, narrow, mech); }) == ErrorCode::unstable_design);
  }
  SUBCASE("blue-detuned damp beam is rejected as unstable") {
    BichromaticOptions o;
    o.damp_detuning_over_gamma = -0.5;
    o.damp_power = 1e-3;
    const BichromaticDesign db = design(g, mech, 1e-6, o);
    CHECK(code_of([&] { combined_performance(db, g, mech); }) == ErrorCode::unstable_design);
  }
}

TEST_CASE("damping comparison against a linear trap") {
  CavityGeometry g = geometry();
  g.decay_rate_override = CavityGeometry::decay_rate_from_finesse(g.length, 1e5);
  const double gamma = g.decay_rate();
  const Mode n(10000);
  const double lambda = n.wavelength(g);
  MechanicalOscillator mech;
  mech.damping = MechanicalOscillator::damping_from_quality(mech.mass, mech.omega_M, 1e6);
  const double xi_L = linear_coupling(g, n, -lambda / 2.0 + lambda / 10.0);
  const DriveField trap{5e-3, -2.5 * gamma, Branch::odd};
  const DriveField cool{10e-6, 0.5 * gamma, Branch::odd};
  const DampingComparison c = damping_comparison(g, n, mech, xi_L, trap, cool, mech.omega_M);
  CHECK(c.cooling_part > 0.0);
  CHECK(c.trap_part < 0.0);
  CHECK(c.hybrid == mech.damping + c.cooling_part);
  CHECK(c.linear_only == c.hybrid + c.trap_part);
  CHECK(c.ratio == c.hybrid / c.linear_only);
  // Removing the anti-damping trap can only help; here it flips the sign.
  CHECK(c.hybrid > c.linear_only);
  const DampingComparison none = damping_comparison(g, n, mech, xi_L, DriveField{0.0, -2.5 * gamma}, cool, mech.omega_M);
  CHECK(none.ratio == 1.0);
}
