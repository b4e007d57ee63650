#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace mim {

// White-noise inputs of the linearized system. The optical quadratures each
// receive sqrt(gamma) times unit-intensity vacuum noise; the momentum row
// receives the thermal force with intensity N = 2 D_M k_B T_e.
struct NoiseSpec {
  double vacuum_rate = 0.0;       // gamma [1/s]
  double thermal_strength = 0.0;  // N [kg^2 m^2 s^-3]
  std::uint64_t seed = 1;

  // Diagonal of the diffusion matrix for a state (optical quadratures..., q, p).
  Eigen::VectorXd diffusion(Eigen::Index dim) const;
};

enum class Integrator { euler_maruyama, exact };
std::string_view to_string(Integrator i);
Integrator integrator_from_string(std::string_view s);

struct SimulationConfig {
  double dt = 0.0;
  double duration = 0.0;
  int n_traj = 1;
  Integrator integrator = Integrator::euler_maruyama;
  bool allow_unstable = false;
  int threads = 1;
  std::vector<int> record;                 // state indices to keep; empty -> position only
  std::optional<Eigen::VectorXd> initial;  // defaults to the zero vector
};

struct TrajectoryEnsemble {
  double dt = 0.0;
  double duration = 0.0;
  long steps = 0;
  int n_traj = 0;
  Eigen::MatrixXd drift;
  std::vector<int> recorded;  // state index of each stored component
  // series[traj][component] holds steps + 1 samples starting at t = 0.
  std::vector<std::vector<std::vector<double>>> series;

  int position_index() const { return static_cast<int>(drift.rows()) - 2; }
  const std::vector<double>& component(int traj, int state_index) const;
  // Slowest decay time 1 / min |Re lambda| of the drift matrix.
  double relaxation_time() const;
};

// Exact discretization of du = M u dt + dW over one step: u' = Phi u + w, w ~ N(0, Q).
struct DiscreteStep {
  Eigen::MatrixXd transition;
  Eigen::MatrixXd covariance;
};
DiscreteStep discretize(const Eigen::MatrixXd& M, const Eigen::VectorXd& diffusion, double dt);

// Stationary covariance: M S + S M^T + diag(diffusion) = 0.
Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& M, const Eigen::VectorXd& diffusion);

TrajectoryEnsemble simulate(const Eigen::MatrixXd& M, const NoiseSpec& noise, const SimulationConfig& cfg);

struct VarianceEstimate {
  double mean;
  double standard_error;
  long samples_per_trajectory;
};

VarianceEstimate estimate_variance(const TrajectoryEnsemble& ens, double burn_in);

struct WindowConfig {
  double burn_in = 0.0;
  long segment_length = 0;  // samples per Welch segment; 0 picks the longest power of two that fits
  double overlap = 0.5;
  double band = 8.0;        // fit band half-width in units of the initial linewidth guess
  int jackknife_groups = 20;
};

struct LorentzianFit {
  double amplitude;       // A in A / ((w0^2 - w^2)^2 + G^2 w^2)
  double omega_eff;
  double linewidth;       // G = D_eff / m
  Eigen::Matrix3d covariance;  // of (A, omega_eff, linewidth) from the weighted fit
  double omega_eff_se;    // jackknife standard errors
  double linewidth_se;
  double chi2_per_dof;
};

struct SpectrumEstimate {
  std::vector<double> omega;  // rad/s, non-negative bins
  std::vector<double> psd;    // two-sided, <x^2> = (1/2pi) * integral over all omega
  std::vector<double> psd_se;
  double resolution = 0.0;    // bin spacing [rad/s]
  LorentzianFit fit;
  double damping(double mass) const { return mass * fit.linewidth; }
  double damping_se(double mass) const { return mass * fit.linewidth_se; }
};

SpectrumEstimate estimate_spectrum(const TrajectoryEnsemble& ens, const WindowConfig& cfg);

}  // namespace mim
