#include "mim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mim/constants.hpp"
#include "mim/error.hpp"

namespace mim {

void MechanicalOscillator::validate() const {
  if (!(mass > 0.0)) throw Error(ErrorCode::invalid_argument, "mass must be positive");
  if (!(omega_M > 0.0)) throw Error(ErrorCode::invalid_argument, "omega_M must be positive");
  if (!(damping >= 0.0)) throw Error(ErrorCode::invalid_argument, "D_M must be non-negative");
  if (!(bath_temperature >= 0.0)) throw Error(ErrorCode::invalid_argument, "T_e must be non-negative");
}

double MechanicalOscillator::thermal_noise_strength() const {
  return 2.0 * damping * kBoltzmann * bath_temperature;
}

void DriveField::validate() const {
  if (!(power >= 0.0) || !std::isfinite(power)) throw Error(ErrorCode::invalid_argument, "P_in must be >= 0");
  if (!std::isfinite(detuning)) throw Error(ErrorCode::invalid_argument, "detuning must be finite");
}

double DriveField::input_amplitude(double omega_n) const { return std::sqrt(power / (kHbar * omega_n)); }

double DriveField::intracavity_photons(double omega_n, double gamma) const {
  const double f = input_amplitude(omega_n);
  return gamma * f * f / (detuning * detuning + 0.25 * gamma * gamma);
}

SteadyState steady_state_quadratic(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                   const DriveField& drive) {
  geom.validate();
  mech.validate();
  drive.validate();
  if (drive.branch == Branch::even)
    throw Error(ErrorCode::antitrapping_configuration,
                "the even branch is a frequency maximum; driving it anti-traps the mirror");
  SteadyState ss;
  ss.b = std::sqrt(drive.intracavity_photons(n.frequency(geom), geom.decay_rate()));
  return ss;
}

double quadratic_stiffness(const MechanicalOscillator& mech, double xi_Q, const SteadyState& ss) {
  return 2.0 * kHbar * xi_Q * ss.b * ss.b + mech.mass * mech.omega_M * mech.omega_M;
}

double quadratic_static_force(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                              const DriveField& drive, double xi_Q, double q) {
  DriveField shifted = drive;
  shifted.detuning = drive.detuning + xi_Q * q * q;
  const double b2 = shifted.intracavity_photons(n.frequency(geom), geom.decay_rate());
  return -(kHbar * xi_Q * b2 + mech.mass * mech.omega_M * mech.omega_M) * q;
}

Eigen::Matrix4d fluctuation_matrix(const CavityGeometry& geom, const MechanicalOscillator& mech,
                                   const DriveField& drive, double xi_Q, const SteadyState& ss) {
  const double g = geom.decay_rate();
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  M(0, 0) = -0.5 * g;
  M(0, 1) = drive.detuning;
  M(1, 0) = -drive.detuning;
  M(1, 1) = -0.5 * g;
  M(2, 3) = 1.0 / mech.mass;
  M(3, 2) = -quadratic_stiffness(mech, xi_Q, ss);
  M(3, 3) = -mech.damping / mech.mass;
  return M;
}

Eigen::MatrixXd linear_drift_matrix(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                    const DriveField& drive, double xi_L, double extra_stiffness) {
  geom.validate();
  mech.validate();
  drive.validate();
  const double g = geom.decay_rate();
  const double d = drive.detuning;
  const double alpha = std::sqrt(drive.intracavity_photons(n.frequency(geom), g));
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(6, 6);
  for (int mode = 0; mode < 2; ++mode) {
    const int x = 2 * mode;
    const int y = x + 1;
    const double sign = mode == 0 ? 1.0 : -1.0;
    M(x, x) = -0.5 * g;
    M(x, y) = d;
    M(y, x) = -d;
    M(y, y) = -0.5 * g;
    M(y, 4) = sign * std::sqrt(2.0) * xi_L * alpha;
    M(5, x) = sign * std::sqrt(2.0) * kHbar * xi_L * alpha;
  }
  M(4, 5) = 1.0 / mech.mass;
  M(5, 4) = -(mech.mass * mech.omega_M * mech.omega_M + extra_stiffness);
  M(5, 5) = -mech.damping / mech.mass;
  return M;
}

std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& M) {
  const Eigen::Index n = M.rows();
  if (n != M.cols()) throw Error(ErrorCode::invalid_argument, "matrix must be square");
  // Faddeev-LeVerrier on a rescaled copy; coefficients are unscaled afterwards.
  double scale = M.cwiseAbs().maxCoeff();
  if (scale == 0.0) scale = 1.0;
  const Eigen::MatrixXd A = M / scale;
  std::vector<double> c(n + 1, 0.0);
  c[0] = 1.0;
  Eigen::MatrixXd Mk = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    Mk = A * Mk + c[k - 1] * I;
    c[k] = -(A * Mk).trace() / static_cast<double>(k);
  }
  double s = 1.0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    s *= scale;
    c[k] *= s;
  }
  return c;
}

bool routh_hurwitz_stable(const std::vector<double>& coefficients) {
  if (coefficients.empty() || coefficients[0] == 0.0) return false;
  std::vector<double> a = coefficients;
  if (a[0] < 0.0)
    for (double& v : a) v = -v;
  for (double v : a)
    if (!(v > 0.0)) return false;
  const std::size_t n = a.size() - 1;
  if (n == 0) return true;
  const std::size_t width = n / 2 + 1;
  std::vector<double> prev(width, 0.0), cur(width, 0.0);
  for (std::size_t i = 0; i < width; ++i) {
    if (2 * i <= n) prev[i] = a[2 * i];
    if (2 * i + 1 <= n) cur[i] = a[2 * i + 1];
  }
  for (std::size_t row = 2; row <= n; ++row) {
    if (!(cur[0] > 0.0)) return false;
    std::vector<double> next(width, 0.0);
    for (std::size_t i = 0; i + 1 < width; ++i)
      next[i] = (cur[0] * prev[i + 1] - prev[0] * cur[i + 1]) / cur[0];
    prev = cur;
    cur = next;
  }
  return cur[0] > 0.0;
}

Eigen::VectorXd balancing_scales(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd B = A;
  for (int iter = 0; iter < 200; ++iter) {
    bool done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(B(j, i));
        r += std::abs(B(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double f = std::exp2(std::round(0.5 * std::log2(r / c)));
      if (f == 1.0) continue;
      done = false;
      B.col(i) *= f;
      B.row(i) /= f;
      s[i] *= f;
    }
    if (done) break;
  }
  return s;
}

StabilityReport stability(const Eigen::MatrixXd& M) {
  StabilityReport r;
  const Eigen::VectorXd s = balancing_scales(M);
  const Eigen::MatrixXd B = s.cwiseInverse().asDiagonal() * M * s.asDiagonal();
  Eigen::EigenSolver<Eigen::MatrixXd> es(B, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::unstable_system, "eigenvalue computation failed");
  double radius = 0.0;
  r.max_real_part = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> ev = es.eigenvalues()[i];
    r.eigenvalues.push_back(ev);
    radius = std::max(radius, std::abs(ev));
    r.max_real_part = std::max(r.max_real_part, ev.real());
  }
  r.stable = r.max_real_part <= 1e-12 * radius;
  // Rescale lambda by the spectral radius so the coefficients stay O(1).
  std::vector<double> c = characteristic_polynomial(radius > 0.0 ? Eigen::MatrixXd(B / radius) : B);
  r.routh_hurwitz = routh_hurwitz_stable(c);
  return r;
}

EffectiveResponse::EffectiveResponse(double mass, double omega_M, double damping)
    : mass_(mass), omega_M_(omega_M), damping_(damping) {}

EffectiveResponse EffectiveResponse::constant(double mass, double omega_eff, double damping) {
  return EffectiveResponse(mass, omega_eff, damping);
}

void EffectiveResponse::add_linear_beam(LinearBeam beam) {
  if (!(beam.gamma > 0.0)) throw Error(ErrorCode::degenerate_parameters, "cavity decay rate must be positive");
  beams_.push_back(beam);
}

namespace {

double lorentz_pair(double gamma, double detuning, double omega) {
  const double h = 0.25 * gamma * gamma;
  return (h + (omega - detuning) * (omega - detuning)) * (h + (omega + detuning) * (omega + detuning));
}

}  // namespace

double EffectiveResponse::omega_eff_sq(double omega) const {
  double v = constant_omega_eff_sq();
  for (const auto& b : beams_) {
    const double h = 0.25 * b.gamma * b.gamma;
    const double lead = b.spring * b.detuning / (b.detuning * b.detuning + h);
    v -= lead * (h - (omega * omega - b.detuning * b.detuning)) / lorentz_pair(b.gamma, b.detuning, omega);
  }
  return v;
}

double EffectiveResponse::damping(double omega) const {
  double v = damping_;
  for (const auto& b : beams_) {
    const double h = 0.25 * b.gamma * b.gamma;
    const double lead = mass_ * b.spring * b.detuning / (b.detuning * b.detuning + h);
    v += lead * b.gamma / lorentz_pair(b.gamma, b.detuning, omega);
  }
  return v;
}

double EffectiveResponse::omega_eff(double omega) const {
  const double w2 = omega_eff_sq(omega);
  return w2 >= 0.0 ? std::sqrt(w2) : std::numeric_limits<double>::quiet_NaN();
}

std::string_view to_string(EffectiveResponse::Kind k) {
  return k == EffectiveResponse::Kind::quadratic_constant ? "quadratic-constant" : "linear-frequency-dependent";
}

EffectiveResponse effective_params_quadratic(const CavityGeometry& geom, Mode n,
                                             const MechanicalOscillator& mech, const DriveField& drive,
                                             const CouplingConstants& coupling) {
  geom.validate();
  mech.validate();
  drive.validate();
  const double g = geom.decay_rate();
  const double d = drive.detuning;
  EffectiveResponse r(mech.mass, mech.omega_M, mech.damping);
  r.add_static_spring(2.0 * coupling.xi_Q * g * drive.power / (mech.mass * n.frequency(geom)) /
                      (d * d + 0.25 * g * g));
  return r;
}

TrapFrequencyReport max_trap_frequency(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                       const DriveField& drive, const CouplingConstants& coupling) {
  DriveField resonant = drive;
  resonant.detuning = 0.0;
  const double wM2 = mech.omega_M * mech.omega_M;
  const double printed = 4.0 * coupling.xi_Q * drive.power / (mech.mass * n.frequency(geom) * geom.decay_rate());
  const double general = effective_params_quadratic(geom, n, mech, resonant, coupling).constant_omega_eff_sq() - wM2;
  TrapFrequencyReport r;
  r.omega_max = std::sqrt(wM2 + printed);
  r.omega_eff_at_zero = std::sqrt(wM2 + general);
  r.excess_ratio = printed > 0.0 ? general / printed : std::numeric_limits<double>::quiet_NaN();
  r.discrepancy = printed > 0.0 && std::abs(general - printed) > 1e-12 * general;
  return r;
}

double linear_spring_prefactor(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                               const DriveField& drive, double xi_L) {
  return 4.0 * xi_L * xi_L * geom.decay_rate() * drive.power / (mech.mass * n.frequency(geom));
}

EffectiveResponse effective_params_linear(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                          const DriveField& drive, const CouplingConstants& coupling) {
  geom.validate();
  mech.validate();
  drive.validate();
  EffectiveResponse r(mech.mass, mech.omega_M, mech.damping);
  if (drive.power > 0.0)
    r.add_linear_beam({linear_spring_prefactor(geom, n, mech, drive, coupling.xi_L), drive.detuning,
                       geom.decay_rate()});
  return r;
}

EffectiveSample effective_params_linear(const CavityGeometry& geom, Mode n, const MechanicalOscillator& mech,
                                        const DriveField& drive, const CouplingConstants& coupling,
                                        double probe_omega) {
  const EffectiveResponse r = effective_params_linear(geom, n, mech, drive, coupling);
  return {probe_omega, r.omega_eff_sq(probe_omega), r.damping(probe_omega)};
}

}  // namespace mim
