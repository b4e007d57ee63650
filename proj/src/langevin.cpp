#include "mim/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include "mim/constants.hpp"
#include "mim/dynamics.hpp"
#include "mim/error.hpp"

namespace mim {

Eigen::VectorXd NoiseSpec::diffusion(Eigen::Index dim) const {
  if (dim < 2) throw Error(ErrorCode::invalid_argument, "state must contain at least q and p");
  Eigen::VectorXd d = Eigen::VectorXd::Constant(dim, vacuum_rate);
  d[dim - 2] = 0.0;
  d[dim - 1] = thermal_strength;
  return d;
}

std::string_view to_string(Integrator i) { return i == Integrator::exact ? "exact" : "euler-maruyama"; }

Integrator integrator_from_string(std::string_view s) {
  if (s == "exact") return Integrator::exact;
  if (s == "euler-maruyama" || s == "em") return Integrator::euler_maruyama;
  throw Error(ErrorCode::config, "integrator must be 'euler-maruyama' or 'exact'");
}

const std::vector<double>& TrajectoryEnsemble::component(int traj, int state_index) const {
  for (std::size_t c = 0; c < recorded.size(); ++c)
    if (recorded[c] == state_index) return series.at(traj)[c];
  throw Error(ErrorCode::invalid_argument, "state component was not recorded");
}

double TrajectoryEnsemble::relaxation_time() const {
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& ev : stability(drift).eigenvalues) slowest = std::min(slowest, std::abs(ev.real()));
  return 1.0 / slowest;
}

DiscreteStep discretize(const Eigen::MatrixXd& M, const Eigen::VectorXd& diffusion, double dt) {
  const Eigen::Index n = M.rows();
  const Eigen::VectorXd s = balancing_scales(M);
  const Eigen::MatrixXd Mb = s.cwiseInverse().asDiagonal() * M * s.asDiagonal();
  const Eigen::MatrixXd Gb = (diffusion.array() / (s.array() * s.array())).matrix().asDiagonal();

  // Van Loan on a substep short enough that exp(-M h) cannot overflow, then
  // repeated doubling: Phi_2h = Phi_h^2, Q_2h = Phi_h Q_h Phi_h^T + Q_h.
  const double mnorm = Mb.cwiseAbs().rowwise().sum().maxCoeff();
  int doublings = 0;
  double h = dt;
  while (mnorm * h > 1.0 && doublings < 200) {
    h *= 0.5;
    ++doublings;
  }
  const double gnorm = Gb.cwiseAbs().maxCoeff();
  const double scale = std::max(Mb.cwiseAbs().maxCoeff(), 1.0 / h);
  const double kappa = gnorm > 0.0 ? scale / gnorm : 1.0;

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  C.topLeftCorner(n, n) = -Mb * h;
  C.topRightCorner(n, n) = kappa * Gb * h;
  C.bottomRightCorner(n, n) = Mb.transpose() * h;
  const Eigen::MatrixXd E = C.exp();
  Eigen::MatrixXd phi_b = E.bottomRightCorner(n, n).transpose();
  Eigen::MatrixXd q_b = phi_b * E.topRightCorner(n, n) / kappa;
  q_b = 0.5 * (q_b + q_b.transpose()).eval();
  for (int k = 0; k < doublings; ++k) {
    q_b = (phi_b * q_b * phi_b.transpose() + q_b).eval();
    q_b = 0.5 * (q_b + q_b.transpose()).eval();
    phi_b = (phi_b * phi_b).eval();
  }

  DiscreteStep step;
  step.transition = s.asDiagonal() * phi_b * s.cwiseInverse().asDiagonal();
  step.covariance = s.asDiagonal() * q_b * s.asDiagonal();
  return step;
}

Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& M, const Eigen::VectorXd& diffusion) {
  const Eigen::Index n = M.rows();
  const Eigen::VectorXd s = balancing_scales(M);
  const Eigen::MatrixXd Mb = s.cwiseInverse().asDiagonal() * M * s.asDiagonal();
  const Eigen::VectorXd gb = diffusion.array() / (s.array() * s.array());
  // vec(M S + S M^T) = (I kron M + M kron I) vec(S), column-major vec.
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index k = 0; k < n; ++k) {
        K(b * n + a, b * n + k) += Mb(a, k);  // (M S)_ab
        K(b * n + a, k * n + a) += Mb(b, k);  // (S M^T)_ab
      }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n * n);
  for (Eigen::Index i = 0; i < n; ++i) rhs[i * n + i] = -gb[i];
  const Eigen::VectorXd v = K.fullPivLu().solve(rhs);
  Eigen::MatrixXd S = Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
  S = 0.5 * (S + S.transpose()).eval();
  return s.asDiagonal() * S * s.asDiagonal();
}

namespace {

// Factor L with L L^T = Q, computed on the correlation matrix to keep
// components of very different magnitude accurate.
Eigen::MatrixXd noise_factor(const Eigen::MatrixXd& Q) {
  const Eigen::Index n = Q.rows();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = Q(i, i) > 0.0 ? std::sqrt(Q(i, i)) : 0.0;
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (d[i] > 0.0 && d[j] > 0.0) R(i, j) = Q(i, j) / (d[i] * d[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return d.asDiagonal() * es.eigenvectors() * lam.asDiagonal();
}

std::mt19937_64 trajectory_rng(std::uint64_t master, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

}  // namespace

TrajectoryEnsemble simulate(const Eigen::MatrixXd& M, const NoiseSpec& noise, const SimulationConfig& cfg) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n || n < 2) throw Error(ErrorCode::invalid_argument, "drift matrix must be square");
  if (!(cfg.dt > 0.0) || !(cfg.duration > 0.0) || cfg.n_traj < 1)
    throw Error(ErrorCode::invalid_argument, "dt, duration and n_traj must be positive");

  const StabilityReport st = stability(M);
  if (!st.stable && !cfg.allow_unstable)
    throw Error(ErrorCode::unstable_system, "drift matrix has an eigenvalue with positive real part");
  double radius = 0.0;
  for (const auto& ev : st.eigenvalues) radius = std::max(radius, std::abs(ev));
  if (cfg.integrator == Integrator::euler_maruyama && cfg.dt > 0.05 / radius)
    throw Error(ErrorCode::step_size, "Euler-Maruyama needs dt <= 0.05 / max|eigenvalue| = " +
                                          std::to_string(0.05 / radius) + " s");

  TrajectoryEnsemble ens;
  ens.dt = cfg.dt;
  ens.steps = std::lround(cfg.duration / cfg.dt);
  ens.duration = ens.steps * cfg.dt;
  ens.n_traj = cfg.n_traj;
  ens.drift = M;
  ens.recorded = cfg.record.empty() ? std::vector<int>{static_cast<int>(n) - 2} : cfg.record;
  for (int idx : ens.recorded)
    if (idx < 0 || idx >= n) throw Error(ErrorCode::invalid_argument, "recorded index out of range");
  ens.series.assign(cfg.n_traj, {});

  const Eigen::VectorXd diff = noise.diffusion(n);
  Eigen::MatrixXd Phi, L;
  if (cfg.integrator == Integrator::exact) {
    const DiscreteStep step = discretize(M, diff, cfg.dt);
    Phi = step.transition;
    L = noise_factor(step.covariance);
  } else {
    Phi = Eigen::MatrixXd::Identity(n, n) + M * cfg.dt;
    L = (diff * cfg.dt).cwiseSqrt().asDiagonal();
  }
  const Eigen::VectorXd u0 = cfg.initial.value_or(Eigen::VectorXd::Zero(n));
  if (u0.size() != n) throw Error(ErrorCode::invalid_argument, "initial state has the wrong dimension");

  auto run = [&](int begin, int end) {
    Eigen::VectorXd u(n), z(n), next(n);
    for (int t = begin; t < end; ++t) {
      std::mt19937_64 rng = trajectory_rng(noise.seed, t);
      std::normal_distribution<double> normal(0.0, 1.0);
      auto& out = ens.series[t];
      out.assign(ens.recorded.size(), std::vector<double>(ens.steps + 1));
      u = u0;
      for (std::size_t c = 0; c < ens.recorded.size(); ++c) out[c][0] = u[ens.recorded[c]];
      for (long k = 1; k <= ens.steps; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
        next.noalias() = Phi * u;
        next.noalias() += L * z;
        u.swap(next);
        for (std::size_t c = 0; c < ens.recorded.size(); ++c) out[c][k] = u[ens.recorded[c]];
      }
    }
  };

  const int workers = std::clamp(cfg.threads, 1, cfg.n_traj);
  if (workers == 1) {
    run(0, cfg.n_traj);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (cfg.n_traj + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int b = w * chunk;
      const int e = std::min(cfg.n_traj, b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return ens;
}

VarianceEstimate estimate_variance(const TrajectoryEnsemble& ens, double burn_in) {
  if (ens.n_traj < 2) throw Error(ErrorCode::statistics, "need at least two trajectories for an error bar");
  const long skip = static_cast<long>(std::ceil(burn_in / ens.dt));
  const long count = ens.steps + 1 - skip;
  const double window = count * ens.dt;
  if (count < 2 || window < 50.0 * ens.relaxation_time())
    throw Error(ErrorCode::statistics, "stationary segment shorter than 50 relaxation times");
  const int qi = ens.position_index();
  std::vector<double> per(ens.n_traj);
  for (int t = 0; t < ens.n_traj; ++t) {
    const auto& q = ens.component(t, qi);
    double acc = 0.0;
    for (long k = skip; k <= ens.steps; ++k) acc += q[k] * q[k];
    per[t] = acc / count;
  }
  // Delete-one jackknife over trajectories; for a plain mean this is the usual SE.
  const double n = ens.n_traj;
  const double mean = std::accumulate(per.begin(), per.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : per) {
    const double loo = (mean * n - v) / (n - 1.0);
    ss += (loo - mean) * (loo - mean);
  }
  return {mean, std::sqrt((n - 1.0) / n * ss), count};
}

namespace {

double lorentzian(const Eigen::Vector3d& p, double w) {
  const double a = p[1] * p[1] - w * w;
  return p[0] / (a * a + p[2] * p[2] * w * w);
}

struct FitOutcome {
  Eigen::Vector3d params;
  Eigen::Matrix3d covariance;
  double chi2;
};

// Weighted Levenberg-Marquardt for the three-parameter resonance model.
FitOutcome fit_lorentzian(const std::vector<double>& w, const std::vector<double>& y,
                          const std::vector<double>& sigma, Eigen::Vector3d p) {
  const Eigen::Vector3d scale = p.cwiseAbs();
  auto residuals = [&](const Eigen::Vector3d& q, Eigen::VectorXd& r) {
    r.resize(w.size());
    double chi2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      r[i] = (y[i] - lorentzian(q, w[i])) / sigma[i];
      chi2 += r[i] * r[i];
    }
    return chi2;
  };
  auto jacobian = [&](const Eigen::Vector3d& q) {
    Eigen::MatrixXd J(w.size(), 3);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double a = q[1] * q[1] - w[i] * w[i];
      const double den = a * a + q[2] * q[2] * w[i] * w[i];
      J(i, 0) = 1.0 / den / sigma[i] * scale[0];
      J(i, 1) = -q[0] * 4.0 * a * q[1] / (den * den) / sigma[i] * scale[1];
      J(i, 2) = -q[0] * 2.0 * q[2] * w[i] * w[i] / (den * den) / sigma[i] * scale[2];
    }
    return J;
  };
  Eigen::VectorXd r;
  double chi2 = residuals(p, r);
  double lambda = 1e-3;
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::MatrixXd J = jacobian(p);
    Eigen::Matrix3d H = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * r;
    bool improved = false;
    for (int inner = 0; inner < 30; ++inner) {
      Eigen::Matrix3d A = H;
      A.diagonal() *= (1.0 + lambda);
      const Eigen::Vector3d step = A.ldlt().solve(g);
      const Eigen::Vector3d trial = p + scale.cwiseProduct(step);
      Eigen::VectorXd rt;
      const double c2 = residuals(trial, rt);
      if (std::isfinite(c2) && c2 < chi2) {
        const double rel = (chi2 - c2) / chi2;
        p = trial;
        r = rt;
        chi2 = c2;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (rel < 1e-12) iter = 1 << 20;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  const Eigen::MatrixXd J = jacobian(p);
  const Eigen::Matrix3d H = J.transpose() * J;
  Eigen::Matrix3d cov = H.inverse();
  cov = scale.asDiagonal() * cov * scale.asDiagonal();
  return {p, cov, chi2};
}

}  // namespace

SpectrumEstimate estimate_spectrum(const TrajectoryEnsemble& ens, const WindowConfig& cfg) {
  const long skip = static_cast<long>(std::ceil(cfg.burn_in / ens.dt));
  const long avail = ens.steps + 1 - skip;
  long seg = cfg.segment_length;
  if (seg == 0) {
    seg = 1;
    while (seg * 2 <= avail) seg *= 2;
  }
  if (seg < 16 || seg > avail) throw Error(ErrorCode::fit, "stationary segment too short for a spectrum");
  const long hop = std::max(1L, static_cast<long>(std::lround(seg * (1.0 - cfg.overlap))));
  const long nseg = (avail - seg) / hop + 1;
  const long nbins = seg / 2 + 1;

  std::vector<double> window(seg);
  double wsum2 = 0.0;
  for (long j = 0; j < seg; ++j) {
    window[j] = 0.5 * (1.0 - std::cos(2.0 * kPi * j / seg));
    wsum2 += window[j] * window[j];
  }
  const double norm = ens.dt / (wsum2 * nseg);

  const int qi = ens.position_index();
  std::vector<std::vector<double>> per(ens.n_traj, std::vector<double>(nbins, 0.0));
  Eigen::FFT<double> fft;
  std::vector<double> buf(seg);
  std::vector<std::complex<double>> spec;
  for (int t = 0; t < ens.n_traj; ++t) {
    const auto& q = ens.component(t, qi);
    for (long s = 0; s < nseg; ++s) {
      const long start = skip + s * hop;
      double mean = 0.0;
      for (long j = 0; j < seg; ++j) mean += q[start + j];
      mean /= seg;
      for (long j = 0; j < seg; ++j) buf[j] = (q[start + j] - mean) * window[j];
      fft.fwd(spec, buf);
      for (long k = 0; k < nbins; ++k) per[t][k] += std::norm(spec[k]) * norm;
    }
  }

  SpectrumEstimate out;
  out.resolution = 2.0 * kPi / (seg * ens.dt);
  out.omega.resize(nbins);
  out.psd.assign(nbins, 0.0);
  out.psd_se.assign(nbins, 0.0);
  const double nt = ens.n_traj;
  for (long k = 0; k < nbins; ++k) {
    out.omega[k] = k * out.resolution;
    double m = 0.0, m2 = 0.0;
    for (int t = 0; t < ens.n_traj; ++t) {
      m += per[t][k];
      m2 += per[t][k] * per[t][k];
    }
    m /= nt;
    out.psd[k] = m;
    out.psd_se[k] = nt > 1 ? std::sqrt(std::max(0.0, (m2 / nt - m * m) / (nt - 1.0))) : m;
  }

  // Initial guesses from the averaged spectrum.
  long peak = 1;
  for (long k = 1; k < nbins; ++k)
    if (out.psd[k] > out.psd[peak]) peak = k;
  const double half = 0.5 * out.psd[peak];
  long lo = peak, hi = peak;
  while (lo > 1 && out.psd[lo] > half) --lo;
  while (hi + 1 < nbins && out.psd[hi] > half) ++hi;
  const double w0 = out.omega[peak];
  const double g0 = std::max(out.omega[hi] - out.omega[lo], out.resolution);
  if (peak < 2 || hi + 1 >= nbins)
    throw Error(ErrorCode::fit, "no resolved resonance peak in the spectrum");

  const double band_lo = std::max(out.resolution, w0 - cfg.band * g0);
  const double band_hi = w0 + cfg.band * g0;
  std::vector<long> idx;
  for (long k = 1; k < nbins; ++k)
    if (out.omega[k] >= band_lo && out.omega[k] <= band_hi) idx.push_back(k);
  if (idx.size() < 8) throw Error(ErrorCode::fit, "fewer than 8 frequency bins across the resonance");

  const Eigen::Vector3d guess(out.psd[peak] * g0 * g0 * w0 * w0, w0, g0);
  auto fit_with = [&](const std::vector<double>& y) {
    std::vector<double> w, yy, s;
    for (long k : idx) {
      w.push_back(out.omega[k]);
      yy.push_back(y[k]);
      s.push_back(out.psd_se[k] > 0.0 ? out.psd_se[k] : out.psd[k]);
    }
    return fit_lorentzian(w, yy, s, guess);
  };

  const FitOutcome full = fit_with(out.psd);
  out.fit.amplitude = full.params[0];
  out.fit.omega_eff = full.params[1];
  out.fit.linewidth = std::abs(full.params[2]);
  out.fit.covariance = full.covariance;
  out.fit.chi2_per_dof = full.chi2 / std::max<double>(1.0, static_cast<double>(idx.size()) - 3.0);

  // Delete-one-group jackknife over trajectories.
  const int groups = std::min(cfg.jackknife_groups, ens.n_traj);
  if (groups >= 2) {
    std::vector<double> wj, gj;
    for (int g = 0; g < groups; ++g) {
      std::vector<double> y(nbins, 0.0);
      int used = 0;
      for (int t = 0; t < ens.n_traj; ++t) {
        if (t % groups == g) continue;
        ++used;
        for (long k : idx) y[k] += per[t][k];
      }
      for (long k : idx) y[k] /= used;
      const FitOutcome f = fit_with(y);
      wj.push_back(f.params[1]);
      gj.push_back(std::abs(f.params[2]));
    }
    auto jk = [&](const std::vector<double>& v) {
      const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      return std::sqrt((groups - 1.0) / groups * ss);
    };
    out.fit.omega_eff_se = jk(wj);
    out.fit.linewidth_se = jk(gj);
  } else {
    out.fit.omega_eff_se = std::sqrt(full.covariance(1, 1));
    out.fit.linewidth_se = std::sqrt(full.covariance(2, 2));
  }

  if (!(out.resolution < out.fit.linewidth / 10.0))
    throw Error(ErrorCode::fit, "frequency resolution " + std::to_string(out.resolution) +
                                    " rad/s does not resolve the linewidth " +
                                    std::to_string(out.fit.linewidth) + " rad/s");
  return out;
}

}  // namespace mim
