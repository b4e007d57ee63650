#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "mim/constants.hpp"
#include "mim/coupling.hpp"
#include "mim/dynamics.hpp"
#include "mim/error.hpp"
#include "mim/langevin.hpp"

using namespace mim;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Optical quadratures plus a unit-mass oscillator of frequency w and linewidth G.
Eigen::MatrixXd oscillator(double gamma, double delta, double w, double G) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4, 4);
  M(0, 0) = M(1, 1) = -0.5 * gamma;
  M(0, 1) = delta;
  M(1, 0) = -delta;
  M(2, 3) = 1.0;
  M(3, 2) = -w * w;
  M(3, 3) = -G;
  return M;
}

// Unit-variance stationary position for the oscillator above with m = 1, w = 1.
NoiseSpec unit_noise(double G, std::uint64_t seed = 3) {
  NoiseSpec n;
  n.vacuum_rate = 1.0;
  n.thermal_strength = 2.0 * G;
  n.seed = seed;
  return n;
}

SimulationConfig config(double dt, double duration, int n_traj, Integrator integ) {
  SimulationConfig c;
  c.dt = dt;
  c.duration = duration;
  c.n_traj = n_traj;
  c.integrator = integ;
  return c;
}

}  // namespace

TEST_CASE("noise spec") {
  NoiseSpec n;
  n.vacuum_rate = 5.0;
  n.thermal_strength = 7.0;
  const Eigen::VectorXd d = n.diffusion(6);
  CHECK(d[0] == 5.0);
  CHECK(d[3] == 5.0);
  CHECK(d[4] == 0.0);
  CHECK(d[5] == 7.0);
  CHECK_THROWS_AS(n.diffusion(1), Error);
  CHECK(integrator_from_string("exact") == Integrator::exact);
  CHECK(integrator_from_string("em") == Integrator::euler_maruyama);
  CHECK(to_string(integrator_from_string(to_string(Integrator::euler_maruyama))) == "euler-maruyama");
  CHECK_THROWS_AS(integrator_from_string("rk4"), Error);
}

TEST_CASE("noiseless decay follows the damped rotation") {
  const double gamma = 2.0, delta = 3.0;
  const Eigen::MatrixXd M = oscillator(gamma, delta, 1.0, 0.1);
  NoiseSpec silent;
  for (Integrator integ : {Integrator::exact, Integrator::euler_maruyama}) {
    SimulationConfig c = config(integ == Integrator::exact ? 0.01 : 1e-5, 2.0, 1, integ);
    c.record = {0, 1};
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(4);
    u0 << 0.7, -0.4, 0.0, 0.0;
    c.initial = u0;
    const TrajectoryEnsemble e = simulate(M, silent, c);
    CHECK(e.steps * e.dt == doctest::Approx(2.0).epsilon(1e-15));
    const double tol = integ == Integrator::exact ? 1e-12 : 1e-4;
    for (long k = 0; k <= e.steps; k += e.steps / 20) {
      const double t = k * e.dt;
      const double decay = std::exp(-0.5 * gamma * t);
      const double x = decay * (u0[0] * std::cos(delta * t) + u0[1] * std::sin(delta * t));
      const double y = decay * (u0[1] * std::cos(delta * t) - u0[0] * std::sin(delta * t));
      CHECK(std::abs(e.component(0, 0)[k] - x) < tol);
      CHECK(std::abs(e.component(0, 1)[k] - y) < tol);
    }
    CHECK_THROWS_AS(e.component(0, 2), Error);
  }
}

TEST_CASE("exact discretization") {
  const Eigen::MatrixXd M = oscillator(1e5, 3e4, 1.0, 0.05);
  NoiseSpec n = unit_noise(0.05);
  const Eigen::VectorXd diff = n.diffusion(4);
  const Eigen::MatrixXd S = stationary_covariance(M, diff);
  Eigen::MatrixXd residual = M * S + S * M.transpose();
  residual += Eigen::MatrixXd(diff.asDiagonal());
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-9 * diff.maxCoeff());
  CHECK(S(2, 2) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(S(3, 3) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(S(0, 0) == doctest::Approx(1.0 / 1e5).epsilon(1e-10));
  for (double dt : {1e-3, 0.1, 0.7}) {
    const DiscreteStep step = discretize(M, diff, dt);
    const Eigen::MatrixXd Phi = (M * dt).exp();
    CHECK((step.transition - Phi).cwiseAbs().maxCoeff() < 1e-10);
    // Stationarity: S = Phi S Phi^T + Q.
    const Eigen::MatrixXd back = step.transition * S * step.transition.transpose() + step.covariance;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(back(i, j) - S(i, j)) < 1e-8 * std::sqrt(S(i, i) * S(j, j)));
  }
}

TEST_CASE("simulation preconditions") {
  NoiseSpec n = unit_noise(0.05);
  Eigen::MatrixXd unstable = oscillator(1.0, 0.0, 1.0, -0.1);
  try {
    simulate(unstable, n, config(0.01, 1.0, 1, Integrator::exact));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unstable_system);
  }
  SimulationConfig c = config(0.01, 1.0, 1, Integrator::exact);
  c.allow_unstable = true;
  CHECK_NOTHROW(simulate(unstable, n, c));
  try {
    simulate(oscillator(100.0, 0.0, 1.0, 0.1), n, config(0.01, 1.0, 1, Integrator::euler_maruyama));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::step_size);
  }
  CHECK_NOTHROW(simulate(oscillator(100.0, 0.0, 1.0, 0.1), n, config(0.01, 1.0, 1, Integrator::exact)));
  CHECK_THROWS_AS(simulate(oscillator(1.0, 0.0, 1.0, 0.1), n, config(0.0, 1.0, 1, Integrator::exact)), Error);
}

TEST_CASE("seeded determinism and thread independence") {
  const Eigen::MatrixXd M = oscillator(10.0, 1.0, 1.0, 0.2);
  SimulationConfig c = config(0.05, 50.0, 7, Integrator::exact);
  c.record = {0, 2, 3};
  const TrajectoryEnsemble a = simulate(M, unit_noise(0.2, 42), c);
  const TrajectoryEnsemble b = simulate(M, unit_noise(0.2, 42), c);
  c.threads = 3;
  const TrajectoryEnsemble t = simulate(M, unit_noise(0.2, 42), c);
  CHECK(a.series == b.series);
  CHECK(a.series == t.series);
  const TrajectoryEnsemble other = simulate(M, unit_noise(0.2, 43), c);
  CHECK(a.series != other.series);
  CHECK(a.series[0] != a.series[1]);
}

TEST_CASE("stationary variance matches equipartition") {
  const double G = 0.05;
  const Eigen::MatrixXd M = oscillator(10.0, 2.0, 1.0, G);
  const double tau = 2.0 / G;
  const double dt = 2.0 * kPi / 8.0;
  const TrajectoryEnsemble e = simulate(M, unit_noise(G, 9), config(dt, 60.0 * tau, 400, Integrator::exact));
  CHECK(e.relaxation_time() == doctest::Approx(tau).epsilon(1e-9));
  const VarianceEstimate v = estimate_variance(e, 10.0 * tau);
  CAPTURE(v.mean);
  CAPTURE(v.standard_error);
  CHECK(std::abs(v.mean - 1.0) < 3.0 * v.standard_error);
  CHECK(v.standard_error < 0.02);
  CHECK_THROWS_AS(estimate_variance(e, 20.0 * tau), Error);
}

TEST_CASE("variance scales with the bath temperature and vanishes without noise") {
  const double G = 0.1;
  const Eigen::MatrixXd M = oscillator(10.0, 0.0, 1.0, G);
  const SimulationConfig c = config(0.5, 60.0 * 2.0 / G, 20, Integrator::exact);
  NoiseSpec base = unit_noise(G, 5);
  base.vacuum_rate = 0.0;
  NoiseSpec hot = base;
  hot.thermal_strength *= 2.0;
  const VarianceEstimate v1 = estimate_variance(simulate(M, base, c), 100.0);
  const VarianceEstimate v2 = estimate_variance(simulate(M, hot, c), 100.0);
  CHECK(rel(v2.mean, 2.0 * v1.mean) < 1e-12);
  CHECK(rel(v2.standard_error, 2.0 * v1.standard_error) < 1e-9);
  NoiseSpec none;
  const VarianceEstimate v0 = estimate_variance(simulate(M, none, c), 100.0);
  CHECK(v0.mean == 0.0);
}

TEST_CASE("halving the step leaves the variance unchanged within errors") {
  const double G = 1.0;
  const Eigen::MatrixXd M = oscillator(4.0, 0.0, 1.0, G);
  NoiseSpec n = unit_noise(G, 21);
  for (Integrator integ : {Integrator::exact, Integrator::euler_maruyama}) {
    const double dt = integ == Integrator::exact ? 0.2 : 0.002;
    const double T = 60.0 * 2.0 / G;
    const VarianceEstimate a = estimate_variance(simulate(M, n, config(dt, T, 100, integ)), 10.0);
    const VarianceEstimate b = estimate_variance(simulate(M, n, config(0.5 * dt, T, 100, integ)), 10.0);
    CAPTURE(to_string(integ));
    CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.standard_error, b.standard_error));
    CHECK(std::abs(b.mean - 1.0) < 3.0 * b.standard_error);
  }
}

TEST_CASE("spectrum fit recovers frequency and linewidth") {
  const double G = 0.05, w = 1.0;
  const Eigen::MatrixXd M = oscillator(10.0, 2.0, w, G);
  const double dt = 2.0 * kPi / 8.0;
  const TrajectoryEnsemble e = simulate(M, unit_noise(G, 77), config(dt, 12000.0, 200, Integrator::exact));
  WindowConfig wc;
  wc.burn_in = 200.0;
  const SpectrumEstimate s = estimate_spectrum(e, wc);
  CAPTURE(s.fit.omega_eff);
  CAPTURE(s.fit.linewidth);
  CAPTURE(s.fit.linewidth_se);
  CHECK(s.resolution < G / 10.0);
  CHECK(std::abs(s.fit.omega_eff - w) < 3.0 * s.fit.omega_eff_se);
  CHECK(std::abs(s.fit.linewidth - G) < 3.0 * s.fit.linewidth_se);
  CHECK(s.fit.linewidth_se < 0.1 * G);
  CHECK(s.damping(2.0) == 2.0 * s.fit.linewidth);
  // Area under the two-sided spectrum reproduces the variance.
  double area = 0.0;
  for (std::size_t k = 1; k < s.psd.size(); ++k) area += s.psd[k] * s.resolution;
  CHECK(area / kPi == doctest::Approx(1.0).epsilon(0.05));

  WindowConfig coarse = wc;
  coarse.segment_length = 256;
  try {
    estimate_spectrum(e, coarse);
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::fit);
  }
}

TEST_CASE("detuning sign flips the added damping of the linear configuration") {
  CavityGeometry g;
  g.length = 5e-3;
  g.transmissivity = 1e-4;
  g.end_transmissivity = 1e-5;
  g.decay_rate_override = CavityGeometry::decay_rate_from_finesse(g.length, 1e5);
  const Mode n(10000);
  const double lambda = n.wavelength(g);
  MechanicalOscillator mech;
  mech.damping = MechanicalOscillator::damping_from_quality(mech.mass, mech.omega_M, 200.0);
  const double xiL = linear_coupling(g, n, -lambda / 2.0 + lambda / 10.0);
  const double gamma = g.decay_rate();

  // Choose the power so the optical damping is half the intrinsic one.
  DriveField unit{1.0, 0.5 * gamma, Branch::odd};
  CouplingConstants cc;
  cc.xi_L = xiL;
  const double per_watt = effective_params_linear(g, n, mech, unit, cc, mech.omega_M).damping - mech.damping;
  const double P = 0.5 * mech.damping / per_watt;

  NoiseSpec noise;
  noise.vacuum_rate = gamma;
  noise.thermal_strength = mech.thermal_noise_strength();
  noise.seed = 13;
  const double period = 2.0 * kPi / mech.omega_M;
  double added[2];
  double se[2];
  int i = 0;
  for (double sign : {1.0, -1.0}) {
    const DriveField d{P, sign * 0.5 * gamma, Branch::odd};
    const Eigen::MatrixXd M = linear_drift_matrix(g, n, mech, d, xiL);
    const TrajectoryEnsemble e = simulate(M, noise, config(period / 6.0, 4.0, 80, Integrator::exact));
    WindowConfig wc;
    wc.burn_in = 0.2;
    const SpectrumEstimate s = estimate_spectrum(e, wc);
    const double predicted = effective_params_linear(g, n, mech, d, cc, s.fit.omega_eff).damping;
    added[i] = s.damping(mech.mass) - mech.damping;
    se[i] = s.damping_se(mech.mass);
    CAPTURE(sign);
    CHECK(std::abs(s.damping(mech.mass) - predicted) < 0.1 * predicted);
    ++i;
  }
  CHECK(added[0] > 3.0 * se[0]);
  CHECK(added[1] < -3.0 * se[1]);
}
