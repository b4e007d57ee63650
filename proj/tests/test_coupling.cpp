#include <doctest.h>

#include <cmath>

#include "mim/constants.hpp"
#include "mim/coupling.hpp"
#include "mim/error.hpp"
#include "oracles.hpp"

using namespace mim;

namespace {

CavityGeometry geometry(double T) {
  CavityGeometry g;
  g.length = 5e-3;
  g.transmissivity = T;
  g.end_transmissivity = 1e-5;
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const Mode kMode(10000);

}  // namespace

TEST_CASE("bare coupling") {
  const CavityGeometry g = geometry(1e-4);
  CHECK(bare_coupling(g, kMode) == kMode.frequency(g) / g.length);
  CavityGeometry g2 = g;
  g2.length = 2.0 * g.length;
  // Same optical frequency in a twice longer cavity is mode 2n.
  CHECK(rel(bare_coupling(g2, Mode(20000)), 0.5 * bare_coupling(g, kMode)) < 1e-15);
  // 2 pi 1e15 rad/s over 5 mm.
  CHECK(hz_to_angular(1e15) / 5e-3 == doctest::Approx(1.26e18).epsilon(0.01));
  // 100 MHz/nm class in Hz per metre (within the order of magnitude).
  const double hz_per_nm = angular_to_hz(bare_coupling(g, kMode)) * 1e-9;
  CHECK(hz_per_nm > 1e7);
  CHECK(hz_per_nm < 1e9);
}

TEST_CASE("linear shifts") {
  const double lambda = kMode.wavelength(geometry(0.5));
  SUBCASE("zero at a node in the limit") {
    // q0 = 0 itself is a quarter-wave point; the branch offsets carry the limit.
    for (double T : {1e-4, 0.3, 0.9}) {
      const BranchPair p = branch_offsets(geometry(T), kMode, 0.0);
      CHECK(p.even == 0.0);
      const LinearShifts s = linear_shifts(geometry(T), kMode, 0.02 * lambda);
      CHECK(s.even >= 0.0);
      CHECK(s.even < linear_shifts(geometry(T), kMode, 0.05 * lambda).even);
    }
  }
  SUBCASE("T = 0 reduces to the see-saw slope") {
    const CavityGeometry g = geometry(0.0);
    const double tau = g.round_trip_time();
    const double kn = kMode.wavenumber(g);
    for (double f : {0.02, 0.1, 0.125, 0.2, 0.23}) {
      const double q0 = f * lambda;
      const LinearShifts s = linear_shifts(g, kMode, q0);
      CHECK(rel(s.even, 2.0 * kn * q0 / tau) < 1e-12);
      CHECK(rel(s.even, kMode.frequency(g) * q0 / g.length) < 1e-12);
    }
  }
  SUBCASE("T = 1 gives position independent shifts") {
    const CavityGeometry g = geometry(1.0);
    for (double f : {0.03, 0.1, 0.3, 0.41}) {
      const LinearShifts s = linear_shifts(g, kMode, f * lambda);
      CHECK(s.even == 0.0);
      CHECK(s.odd == kPi / g.round_trip_time());
    }
  }
  SUBCASE("wrong regime") {
    try {
      linear_shifts(geometry(0.1), kMode, 0.25 * lambda + 1e-10);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::wrong_regime);
    }
    CHECK_THROWS_AS(linear_coupling(geometry(0.1), kMode, 0.0), Error);
  }
}

TEST_CASE("gap identity") {
  for (double T : {1e-4, 0.01, 0.5, 0.99}) {
    const CavityGeometry g = geometry(T);
    const double lambda = kMode.wavelength(g);
    for (double f : {0.05, 0.1, 0.17, -0.31, 0.4}) {
      const double q0 = f * lambda;
      const BranchPair p = branch_offsets(g, kMode, q0);
      const LinearShifts s = linear_shifts(g, kMode, q0);
      CHECK(rel(p.odd - p.even, s.even + s.odd) < 1e-13);
      CHECK(rel(-p.even, s.even) < 1e-12);
    }
  }
}

TEST_CASE("linear coupling examples") {
  const double lambda = kMode.wavelength(geometry(0.5));
  SUBCASE("T to zero at lambda/8") {
    const CavityGeometry g = geometry(1e-12);
    CHECK(rel(std::abs(linear_coupling(g, kMode, lambda / 8.0)), bare_coupling(g, kMode)) < 1e-6);
    CHECK(linear_coupling(geometry(0.0), kMode, lambda / 8.0) == doctest::Approx(bare_coupling(g, kMode)));
  }
  SUBCASE("zeros at quarter-wave points") {
    for (double T : {1e-4, 0.2, 0.7}) {
      for (int j = -4; j <= 4; ++j)
        CHECK(linear_coupling_profile(geometry(T), kMode, j * lambda / 4.0) == 0.0);
    }
  }
  SUBCASE("ground-state placement") {
    const CavityGeometry g = geometry(1e-4);
    const double xiL = linear_coupling(g, kMode, -lambda / 2.0 + lambda / 10.0);
    CHECK(std::abs(xiL) / bare_coupling(g, kMode) > 0.9);
    CHECK(std::abs(xiL) / bare_coupling(g, kMode) <= 1.0);
  }
  SUBCASE("T = 0.7 optimum") {
    const CavityGeometry g = geometry(0.7);
    double peak = 0.0;
    for (int i = 0; i <= 4000; ++i) peak = std::max(peak, std::abs(linear_coupling_profile(g, kMode, lambda * i / 8000.0)));
    const double ratio = peak / bare_coupling(g, kMode);
    CHECK(ratio == doctest::Approx(std::sqrt(0.3)).epsilon(1e-6));
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.15));
  }
}

TEST_CASE("linear coupling bounded by the bare coupling and odd about its zeros") {
  for (double T : {1e-6, 1e-4, 1e-2, 0.1, 0.5, 0.9, 1.0}) {
    const CavityGeometry g = geometry(T);
    const double xi = bare_coupling(g, kMode);
    const double lambda = kMode.wavelength(g);
    for (int i = -400; i <= 400; ++i) {
      const double q0 = lambda * i / 800.0;
      const double v = linear_coupling_profile(g, kMode, q0);
      CHECK(std::abs(v) <= xi);
      for (int j : {0, 1, 2}) {
        const double z = j * lambda / 4.0;
        CHECK(linear_coupling_profile(g, kMode, 2.0 * z - q0) ==
              doctest::Approx(-v).epsilon(1e-9).scale(xi * 1e-6));
      }
    }
  }
}

TEST_CASE("peak linear coupling grows toward the bare coupling as T falls") {
  double prev = 0.0;
  for (double T : {0.9, 0.5, 0.1, 1e-2, 1e-4}) {
    const CavityGeometry g = geometry(T);
    const double lambda = kMode.wavelength(g);
    double peak = 0.0;
    for (int i = 0; i <= 2000; ++i) peak = std::max(peak, linear_coupling_profile(g, kMode, lambda * i / 8000.0));
    CHECK(peak > prev);
    prev = peak;
  }
  CHECK(prev / bare_coupling(geometry(1e-4), kMode) > 0.999);
}

TEST_CASE("finite differences of the branches reproduce the linear coupling") {
  for (double T : {1e-4, 0.05, 0.5}) {
    const CavityGeometry g = geometry(T);
    const double lambda = kMode.wavelength(g);
    const double h = lambda * 1e-6;
    for (double f : {0.05, 0.1, 0.125, 0.2, -0.4, 0.33}) {
      const double q0 = f * lambda;
      const double xiL = linear_coupling(g, kMode, q0);
      const BranchPair up = branch_offsets(g, kMode, q0 + h);
      const BranchPair dn = branch_offsets(g, kMode, q0 - h);
      CHECK(rel((up.even - dn.even) / (2.0 * h), -xiL) < 1e-4);
      CHECK(rel((up.odd - dn.odd) / (2.0 * h), xiL) < 1e-4);
    }
  }
}

TEST_CASE("finite differences of the branches reproduce the quadratic coupling") {
  for (double T : {1e-4, 0.05, 0.5}) {
    const CavityGeometry g = geometry(T);
    const double lambda = kMode.wavelength(g);
    const double h = lambda * 1e-6;
    const double xiQ = quadratic_coupling(g, kMode);
    const double xi = bare_coupling(g, kMode);
    for (int j = -2; j <= 3; ++j) {
      const double q0 = j * lambda / 4.0;
      const BranchPair up = branch_offsets(g, kMode, q0 + h);
      const BranchPair mid = branch_offsets(g, kMode, q0);
      const BranchPair dn = branch_offsets(g, kMode, q0 - h);
      // The even branch curves down at even j and up at odd j.
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      CHECK(rel((up.even - 2.0 * mid.even + dn.even) / (2.0 * h * h), -sign * xiQ) < 1e-4);
      CHECK(rel((up.odd - 2.0 * mid.odd + dn.odd) / (2.0 * h * h), sign * xiQ) < 1e-4);
      CHECK(std::abs((up.even - dn.even) / (2.0 * h)) < 1e-4 * xi);
      CHECK(std::abs((up.odd - dn.odd) / (2.0 * h)) < 1e-4 * xi);
    }
  }
}

TEST_CASE("quadratic detuning") {
  CHECK(quadratic_detuning(geometry(0.0)) == 0.0);
  const CavityGeometry g1 = geometry(1.0);
  CHECK(quadratic_detuning(g1) == doctest::Approx(kPi / g1.round_trip_time()).epsilon(1e-15));
  const CavityGeometry g = geometry(1e-4);
  const double d = quadratic_detuning(g);
  CHECK(d == doctest::Approx(6.0e8).epsilon(0.01));
  CHECK(rel(d, oracle::c * std::sqrt(1e-4) / g.length) < 1e-4);
  for (double T = 0.0; T <= 1.0; T += 0.05) {
    const double v = quadratic_detuning(geometry(T));
    CHECK(v >= 0.0);
    CHECK(v <= kPi / g.round_trip_time() * (1.0 + 1e-15));
  }
}

TEST_CASE("quadratic coupling") {
  try {
    quadratic_coupling(geometry(0.0), kMode);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::divergent_coupling);
  }
  CHECK(quadratic_coupling(geometry(1.0), kMode) == 0.0);
  CHECK(quadratic_coupling(geometry(1.0 - 1e-12), kMode) < 1e-5 * quadratic_coupling(geometry(0.5), kMode));
  double prev = INFINITY;
  for (double T = 1e-6; T <= 1.0; T *= 1.5) {
    const double v = quadratic_coupling(geometry(T), kMode);
    CHECK(v < prev);
    CHECK(v >= 0.0);
    prev = v;
  }
  const CavityGeometry g = geometry(1e-4);
  const double xi = kMode.frequency(g) / g.length;
  const double expected = 0.5 * (2.0 * g.length / oracle::c) * xi * xi * std::sqrt((1.0 - 1e-4) / 1e-4);
  CHECK(rel(quadratic_coupling(g, kMode), expected) < 1e-14);
  const double hz_per_nm2 = angular_to_hz(expected) * 1e-18;
  CHECK(hz_per_nm2 > 1e7);
  CHECK(hz_per_nm2 < 1e10);
}

TEST_CASE("coupling regime") {
  const CavityGeometry g = geometry(1e-4);
  const double lambda = kMode.wavelength(g);
  CHECK(coupling_regime(g, kMode, lambda / 4.0) == Regime::quadratic);
  CHECK(coupling_regime(g, kMode, lambda / 8.0) == Regime::linear);
  CHECK(coupling_regime(g, kMode, lambda / 4.0 + lambda / 100.0) == Regime::linear);
  CHECK(coupling_regime(g, kMode, lambda / 4.0 + 0.99 * lambda / 100.0) == Regime::quadratic);
  CHECK(coupling_regime(g, kMode, -lambda / 2.0 + 1e-12) == Regime::quadratic);
  CHECK(coupling_regime(g, kMode, lambda / 8.0, lambda / 7.0) == Regime::quadratic);
  CHECK_THROWS_AS(coupling_regime(g, kMode, 0.0, 0.0), Error);
}

TEST_CASE("coupling constants bundle") {
  const CavityGeometry g = geometry(1e-4);
  const double lambda = kMode.wavelength(g);
  const CouplingConstants lin = coupling_constants(g, kMode, lambda / 8.0);
  CHECK(lin.regime == Regime::linear);
  CHECK(lin.xi == bare_coupling(g, kMode));
  CHECK(lin.xi_L == linear_coupling(g, kMode, lambda / 8.0));
  CHECK(lin.delta_e > 0.0);
  const CouplingConstants quad = coupling_constants(g, kMode, 0.0);
  CHECK(quad.regime == Regime::quadratic);
  CHECK(quad.xi_L == 0.0);
  CHECK(quad.xi_Q == quadratic_coupling(g, kMode));
  CHECK(quad.Delta_o == quadratic_detuning(g));
  const CouplingConstants sharp = coupling_constants(geometry(0.0), kMode, 0.0);
  CHECK(sharp.xi_Q == 0.0);
}

TEST_CASE("coupling sweep") {
  const CavityGeometry g = geometry(1e-4);
  const double lambda = kMode.wavelength(g);
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(-lambda / 2.0 + lambda * i / 40.0);
  const CouplingSweep one = coupling_sweep(g, kMode, {0.3}, grid);
  CHECK(one.linear.size() == grid.size());
  CHECK(one.quadratic.size() == 1);
  const CouplingSweep many = coupling_sweep(g, kMode, {0.0, 1e-4, 0.3}, grid);
  CHECK(many.linear.size() == 3 * grid.size());
  CHECK(many.quadratic.size() == 2);
  for (const auto& r : many.linear) {
    const double phase = 4.0 * r.q0 / lambda;
    if (std::abs(phase - std::round(phase)) < 1e-12 && r.transmissivity > 0.0) CHECK(r.xi_L == 0.0);
  }
  CHECK_THROWS_AS(coupling_sweep(g, kMode, {1.5}, grid), Error);
}
