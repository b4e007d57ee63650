#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mim/bichromatic.hpp"
#include "mim/config.hpp"
#include "mim/constants.hpp"
#include "mim/coupling.hpp"
#include "mim/dynamics.hpp"
#include "mim/error.hpp"
#include "mim/langevin.hpp"
#include "mim/modespectrum.hpp"
#include "mim/report.hpp"
#include "mim/thermometry.hpp"

using namespace mim;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::config, msg); }

struct Common {
  std::string config_path;
  std::string out_path;
  std::optional<long> seed;
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? default_config() : load_config(c.config_path);
  if (c.seed) {
    if (*c.seed < 0) config_error("--seed must be non-negative");
    cfg.sde.seed = static_cast<std::uint64_t>(*c.seed);
  }
  return cfg;
}

// Writes to a temporary name first so a failed run leaves no partial output.
class Output {
 public:
  explicit Output(std::string path) : path_(std::move(path)) {
    if (path_.empty()) return;
    file_.open(path_ + ".tmp", std::ios::binary);
    if (!file_) config_error("cannot open output file '" + path_ + "'");
  }
  std::ostream& stream() { return path_.empty() ? std::cout : static_cast<std::ostream&>(file_); }
  void commit() {
    if (path_.empty()) return;
    file_.close();
    if (std::rename((path_ + ".tmp").c_str(), path_.c_str()) != 0)
      throw Error(ErrorCode::invalid_argument, "cannot write '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

void write_json(const std::string& path, const json& j) {
  Output out(path);
  out.stream() << j.dump(2) << '\n';
  out.commit();
}

std::vector<double> grid(double lo, double hi, int points, const std::string& what) {
  if (points < 1) config_error(what + ": at least one grid point is required");
  if (!(lo <= hi)) config_error(what + ": empty range");
  if (points == 1) return {lo};
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

json drive_json(const DriveField& d) {
  return {{"power_W", d.power}, {"detuning_rad_s", d.detuning}, {"branch", std::string(to_string(d.branch))}};
}

// Quadratic regime: each drive adds a constant spring and no damping.
EffectiveResponse quadratic_response(const RunConfig& cfg, const CouplingConstants& cc) {
  EffectiveResponse r(cfg.mechanics.mass, cfg.mechanics.omega_M, cfg.mechanics.damping);
  const double wM2 = cfg.mechanics.omega_M * cfg.mechanics.omega_M;
  for (const DriveField& d : cfg.drives) {
    const EffectiveResponse one = effective_params_quadratic(cfg.geometry, cfg.mode, cfg.mechanics, d, cc);
    r.add_static_spring(one.constant_omega_eff_sq() - wM2);
  }
  return r;
}

EffectiveResponse linear_response(const RunConfig& cfg, const CouplingConstants& cc) {
  EffectiveResponse r(cfg.mechanics.mass, cfg.mechanics.omega_M, cfg.mechanics.damping);
  for (const DriveField& d : cfg.drives) {
    const EffectiveResponse one = effective_params_linear(cfg.geometry, cfg.mode, cfg.mechanics, d, cc);
    for (const auto& b : one.beams()) r.add_linear_beam(b);
  }
  return r;
}

CouplingConstants constants_for(const RunConfig& cfg) {
  const CouplingConstants cc =
      coupling_constants(cfg.geometry, cfg.mode, cfg.mechanics.rest_position, cfg.quadratic_window());
  if (cc.regime != cfg.regime)
    config_error("regime '" + std::string(to_string(cfg.regime)) + "' does not match q0, which is in the " +
                 std::string(to_string(cc.regime)) + " regime");
  return cc;
}

EffectiveResponse response_for(const RunConfig& cfg, const CouplingConstants& cc) {
  return cfg.regime == Regime::quadratic ? quadratic_response(cfg, cc) : linear_response(cfg, cc);
}

// ---- spectrum

struct SpectrumArgs {
  std::vector<int> modes;
  std::optional<double> q_min, q_max;
  std::optional<int> q_points;
  std::optional<std::string> method;
};

int cmd_spectrum(const Common& common, const SpectrumArgs& a) {
  RunConfig cfg = load(common);
  if (!a.modes.empty()) cfg.spectrum.modes = a.modes;
  for (int m : cfg.spectrum.modes)
    if (m < 1) config_error("mode numbers must be >= 1");
  if (a.q_min) cfg.spectrum.q_min = a.q_min;
  if (a.q_max) cfg.spectrum.q_max = a.q_max;
  if (a.q_points) cfg.spectrum.q_points = *a.q_points;
  if (a.method) {
    if (*a.method == "closed-form") cfg.spectrum.method = SpectrumMethod::closed_form;
    else if (*a.method == "exact") cfg.spectrum.method = SpectrumMethod::exact;
    else config_error("--method must be 'closed-form' or 'exact'");
  }
  const double quarter = Mode(cfg.spectrum.modes.front()).wavelength(cfg.geometry) / 4.0;
  const std::vector<double> q = grid(cfg.spectrum.q_min.value_or(-quarter), cfg.spectrum.q_max.value_or(quarter),
                                     cfg.spectrum.q_points, "spectrum q range");
  const auto points = spectrum_sweep(cfg.geometry, cfg.spectrum.modes, q, cfg.spectrum.method);

  Output out(common.out_path);
  CsvWriter csv(out.stream(), {"mode_number", "branch", "q_m", "omega_rad_s", "offset_from_omega_n_rad_s"});
  for (const auto& p : points) {
    const double wn = reference_frequency(cfg.geometry, Mode(static_cast<int>(p.mode_order)));
    csv.row({static_cast<long>(p.mode_order), std::string(to_string(p.branch)), p.position, p.omega, p.omega - wn});
  }
  out.commit();
  return 0;
}

// ---- coupling

struct CouplingArgs {
  std::vector<double> T_list;
  std::optional<double> q0_min, q0_max;
  std::optional<int> q0_points;
};

int cmd_coupling(const Common& common, const CouplingArgs& a) {
  RunConfig cfg = load(common);
  if (!a.T_list.empty()) cfg.coupling.transmissivities = a.T_list;
  if (a.q0_min) cfg.coupling.q0_min = a.q0_min;
  if (a.q0_max) cfg.coupling.q0_max = a.q0_max;
  if (a.q0_points) cfg.coupling.q0_points = *a.q0_points;
  const Mode n(cfg.mode);
  const double half = n.wavelength(cfg.geometry) / 2.0;
  const std::vector<double> q0 = grid(cfg.coupling.q0_min.value_or(-half), cfg.coupling.q0_max.value_or(half),
                                      cfg.coupling.q0_points, "coupling q0 range");
  const CouplingSweep sweep = coupling_sweep(cfg.geometry, n, cfg.coupling.transmissivities, q0);
  const double xi = bare_coupling(cfg.geometry, n);
  const double inf = std::numeric_limits<double>::infinity();

  Output out(common.out_path);
  CsvWriter csv(out.stream(), {"T", "q0_m", "xi_L_rad_s_m", "xi_L_over_xi", "Delta_o_rad_s", "xi_Q_rad_s_m2"});
  for (const auto& p : sweep.linear) {
    double Delta_o = 0.0, xi_Q = inf;
    for (const auto& qp : sweep.quadratic)
      if (qp.transmissivity == p.transmissivity) {
        Delta_o = qp.Delta_o;
        xi_Q = qp.xi_Q;
      }
    csv.row({p.transmissivity, p.q0, p.xi_L, p.xi_L / xi, Delta_o, xi_Q});
  }
  out.commit();
  return 0;
}

// ---- effective

struct EffectiveArgs {
  std::optional<std::string> regime;
  std::optional<double> omega_min, omega_max;
  std::optional<int> omega_points;
  std::string report_path;
};

int cmd_effective(const Common& common, const EffectiveArgs& a) {
  RunConfig cfg = load(common);
  if (a.regime) {
    if (*a.regime == "linear") cfg.regime = Regime::linear;
    else if (*a.regime == "quadratic") cfg.regime = Regime::quadratic;
    else config_error("--regime must be 'linear' or 'quadratic'");
  }
  if (a.omega_min) cfg.effective.omega_min = *a.omega_min;
  if (a.omega_max) cfg.effective.omega_max = *a.omega_max;
  if (a.omega_points) cfg.effective.omega_points = *a.omega_points;
  const CouplingConstants cc = constants_for(cfg);
  const EffectiveResponse r = response_for(cfg, cc);
  double scale = cfg.geometry.decay_rate();
  for (const DriveField& d : cfg.drives) scale = std::max(scale, std::abs(d.detuning));
  const std::vector<double> w =
      grid(cfg.effective.omega_min, cfg.effective.omega_max.value_or(4.0 * scale), cfg.effective.omega_points,
           "effective omega range");

  Output out(common.out_path);
  CsvWriter csv(out.stream(), {"omega_rad_s", "omega_eff_sq_rad2_s2", "omega_eff_rad_s", "D_eff_kg_s", "D_eff_over_D_M"});
  for (double x : w) csv.row({x, r.omega_eff_sq(x), r.omega_eff(x), r.damping(x), r.damping(x) / cfg.mechanics.damping});
  out.commit();

  if (!a.report_path.empty()) {
    json rep = {{"regime", std::string(to_string(cfg.regime))},
                {"kind", std::string(to_string(r.kind()))},
                {"coupling", to_json(cc)},
                {"omega_eff_at_omega_M_rad_s", r.omega_eff(cfg.mechanics.omega_M)},
                {"omega_eff_over_omega_M", r.omega_eff(cfg.mechanics.omega_M) / cfg.mechanics.omega_M},
                {"D_eff_at_omega_M_kg_s", r.damping(cfg.mechanics.omega_M)},
                {"D_eff_over_D_M", r.damping(cfg.mechanics.omega_M) / cfg.mechanics.damping}};
    json drives = json::array();
    for (const DriveField& d : cfg.drives) {
      json dj = drive_json(d);
      if (cfg.regime == Regime::quadratic)
        dj["trap_frequency"] = to_json(max_trap_frequency(cfg.geometry, cfg.mode, cfg.mechanics, d, cc));
      drives.push_back(dj);
    }
    rep["drives"] = drives;
    write_json(a.report_path, rep);
  }
  return 0;
}

// ---- thermo

int cmd_thermo(const Common& common, const std::optional<std::string>& method) {
  const RunConfig cfg = load(common);
  IntegralMethod m = IntegralMethod::analytic;
  if (method) {
    if (*method == "numeric") m = IntegralMethod::numeric;
    else if (*method != "analytic") config_error("--method must be 'analytic' or 'numeric'");
  }
  const CouplingConstants cc = constants_for(cfg);
  const ThermalSummary s = thermal_summary(cfg.mechanics, response_for(cfg, cc), m);
  json rep = to_json(s);
  rep["regime"] = std::string(to_string(cfg.regime));
  rep["bath_temperature_K"] = cfg.mechanics.bath_temperature;
  write_json(common.out_path, rep);
  return 0;
}

// ---- sde

struct SdeArgs {
  std::optional<int> n_traj;
  std::optional<double> dt, duration;
  std::optional<std::string> integrator;
  std::optional<int> threads;
  std::string trajectory_path;
};

int cmd_sde(const Common& common, const SdeArgs& a) {
  RunConfig cfg = load(common);
  if (a.n_traj) cfg.sde.n_traj = *a.n_traj;
  if (a.dt) cfg.sde.dt = a.dt;
  if (a.duration) cfg.sde.duration = a.duration;
  if (a.integrator) cfg.sde.integrator = integrator_from_string(*a.integrator);
  if (a.threads) cfg.sde.threads = *a.threads;
  if (cfg.sde.n_traj < 1 || cfg.sde.threads < 1) config_error("n_traj and threads must be positive");
  if (cfg.drives.size() != 1) config_error("sde needs exactly one drive");
  const DriveField& drive = cfg.drives.front();
  const MechanicalOscillator& mech = cfg.mechanics;

  const CouplingConstants cc = constants_for(cfg);
  Eigen::MatrixXd M;
  if (cfg.regime == Regime::quadratic) {
    const SteadyState ss = steady_state_quadratic(cfg.geometry, cfg.mode, mech, drive);
    M = fluctuation_matrix(cfg.geometry, mech, drive, cc.xi_Q, ss);
  } else {
    M = linear_drift_matrix(cfg.geometry, cfg.mode, mech, drive, cc.xi_L);
  }
  const EffectiveResponse resp = response_for(cfg, cc);
  const double w_eff = resp.omega_eff(mech.omega_M);
  if (!(w_eff > 0.0)) throw Error(ErrorCode::degenerate_parameters, "negative effective spring");

  const StabilityReport st = stability(M);
  double radius = 0.0, slowest = std::numeric_limits<double>::infinity();
  for (const auto& ev : st.eigenvalues) {
    radius = std::max(radius, std::abs(ev));
    slowest = std::min(slowest, std::abs(ev.real()));
  }
  const double relax = 1.0 / slowest;
  const double period = 2.0 * kPi / w_eff;
  const double dt = cfg.sde.dt.value_or(cfg.sde.integrator == Integrator::exact ? period / 8.0 : 0.05 / radius);
  const double burn_in = cfg.sde.burn_in.value_or(20.0 * relax);
  const double duration = cfg.sde.duration.value_or(burn_in + 4.0 * 16.0 * relax);
  if (!(burn_in >= 0.0 && burn_in < duration)) config_error("burn-in must be shorter than the duration");

  NoiseSpec noise;
  noise.vacuum_rate = cfg.geometry.decay_rate();
  noise.thermal_strength = mech.thermal_noise_strength();
  noise.seed = cfg.sde.seed;
  SimulationConfig sc;
  sc.dt = dt;
  sc.duration = duration;
  sc.n_traj = cfg.sde.n_traj;
  sc.integrator = cfg.sde.integrator;
  sc.allow_unstable = cfg.sde.allow_unstable;
  sc.threads = cfg.sde.threads;
  const TrajectoryEnsemble ens = simulate(M, noise, sc);

  const VarianceEstimate v = estimate_variance(ens, burn_in);
  const double to_kelvin = mech.mass * w_eff * w_eff / kBoltzmann;
  json rep = {{"regime", std::string(to_string(cfg.regime))},
              {"integrator", std::string(to_string(cfg.sde.integrator))},
              {"seed", cfg.sde.seed},
              {"n_traj", ens.n_traj},
              {"dt_s", ens.dt},
              {"duration_s", ens.duration},
              {"burn_in_s", burn_in},
              {"steps", ens.steps},
              {"stability", to_json(st)},
              {"variance_m2", v.mean},
              {"variance_se_m2", v.standard_error},
              {"T_eff_K", to_kelvin * v.mean},
              {"T_eff_se_K", to_kelvin * v.standard_error},
              {"predicted_omega_eff_rad_s", w_eff},
              {"predicted_D_eff_kg_s", resp.damping(mech.omega_M)}};
  try {
    const ThermalSummary ts = thermal_summary(mech, resp);
    rep["predicted_variance_m2"] = ts.variance;
    rep["predicted_T_eff_K"] = ts.T_eff;
  } catch (const Error& e) {
    rep["predicted_variance_m2"] = std::string(e.what());
  }
  WindowConfig wc;
  wc.burn_in = burn_in;
  if (cfg.sde.segment_length > 0) wc.segment_length = cfg.sde.segment_length;
  try {
    const SpectrumEstimate s = estimate_spectrum(ens, wc);
    rep["fit"] = to_json(s.fit);
    rep["fit_D_eff_kg_s"] = s.damping(mech.mass);
    rep["fit_D_eff_se_kg_s"] = s.damping_se(mech.mass);
    rep["spectrum_resolution_rad_s"] = s.resolution;
  } catch (const Error& e) {
    rep["fit"] = std::string(e.what());
  }
  write_json(common.out_path, rep);

  if (!a.trajectory_path.empty()) {
    Output out(a.trajectory_path);
    CsvWriter csv(out.stream(), {"t_s", "q_m"});
    const auto& q = ens.component(0, ens.position_index());
    for (std::size_t i = 0; i < q.size(); ++i) csv.row({static_cast<double>(i) * ens.dt, q[i]});
    out.commit();
  }
  return 0;
}

// ---- design

int cmd_design(const Common& common, std::optional<double> lambda_d_arg) {
  const RunConfig cfg = load(common);
  const double lambda_d =
      lambda_d_arg.value_or(cfg.design.lambda_d.value_or(Mode(cfg.mode).wavelength(cfg.geometry)));
  const BichromaticDesign d = design(cfg.geometry, cfg.mechanics, lambda_d, cfg.design.bichromatic);
  json rep = {{"design", to_json(d)}};
  try {
    rep["performance"] = to_json(combined_performance(d, cfg.geometry, cfg.mechanics));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::unstable_design) throw;
    rep["performance"] = std::string(e.what());
  }

  const Mode damp = Mode::at_wavelength(cfg.geometry, lambda_d);
  const double gamma = cfg.geometry.decay_rate();
  const double q_ref = cfg.design.reference_q0.value_or(-lambda_d / 2.0 + cfg.design.bichromatic.offset_fraction * lambda_d);
  const double xi_L = linear_coupling_profile(cfg.geometry, damp, q_ref);
  DriveField trap = cfg.design.reference_trap;
  trap.detuning = cfg.design.reference_trap_detuning_over_gamma * gamma;
  const DriveField cool = d.damp_drive;
  json cmp = to_json(damping_comparison(cfg.geometry, damp, cfg.mechanics, xi_L, trap, cool, cfg.mechanics.omega_M));
  cmp["reference_q0_m"] = q_ref;
  cmp["reference_trap"] = drive_json(trap);
  cmp["cooling"] = drive_json(cool);
  rep["damping_comparison"] = cmp;
  write_json(common.out_path, rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trapping and cooling of a partially transmissive mirror in a three-mirror cavity"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON configuration file (defaults built in)");
    sub->add_option("--out", common.out_path, "output file (stdout if omitted)");
    sub->add_option("--seed", common.seed, "random seed");
  };

  SpectrumArgs sa;
  CLI::App* spectrum = app.add_subcommand("spectrum", "doublet frequencies over mirror positions (CSV)");
  add_common(spectrum);
  spectrum->add_option("--modes", sa.modes, "mode numbers");
  spectrum->add_option("--q-min", sa.q_min, "first position [m]");
  spectrum->add_option("--q-max", sa.q_max, "last position [m]");
  spectrum->add_option("--q-points", sa.q_points, "number of positions");
  spectrum->add_option("--method", sa.method, "closed-form or exact");

  CouplingArgs ca;
  CLI::App* coupling = app.add_subcommand("coupling", "linear and quadratic couplings over T and q0 (CSV)");
  add_common(coupling);
  coupling->add_option("--T", ca.T_list, "middle-mirror transmissivities");
  coupling->add_option("--q0-min", ca.q0_min, "first rest position [m]");
  coupling->add_option("--q0-max", ca.q0_max, "last rest position [m]");
  coupling->add_option("--q0-points", ca.q0_points, "number of rest positions");

  EffectiveArgs ea;
  CLI::App* effective = app.add_subcommand("effective", "effective spring and damping over frequency (CSV)");
  add_common(effective);
  effective->add_option("--regime", ea.regime, "linear or quadratic");
  effective->add_option("--omega-min", ea.omega_min, "first probe frequency [rad/s]");
  effective->add_option("--omega-max", ea.omega_max, "last probe frequency [rad/s]");
  effective->add_option("--omega-points", ea.omega_points, "number of probe frequencies");
  effective->add_option("--report", ea.report_path, "JSON summary file");

  std::optional<std::string> thermo_method;
  CLI::App* thermo = app.add_subcommand("thermo", "effective temperature and phonon number (JSON)");
  add_common(thermo);
  thermo->add_option("--method", thermo_method, "analytic or numeric");

  SdeArgs da;
  CLI::App* sde = app.add_subcommand("sde", "stochastic simulation of the linearized dynamics (JSON)");
  add_common(sde);
  sde->add_option("--n-traj", da.n_traj, "number of trajectories");
  sde->add_option("--dt", da.dt, "time step [s]");
  sde->add_option("--duration", da.duration, "trajectory length [s]");
  sde->add_option("--integrator", da.integrator, "euler-maruyama or exact");
  sde->add_option("--threads", da.threads, "worker threads");
  sde->add_option("--trajectory", da.trajectory_path, "CSV of the first trajectory's position");

  std::optional<double> lambda_d;
  CLI::App* design_cmd = app.add_subcommand("design", "two-wavelength trap and damp design (JSON)");
  add_common(design_cmd);
  design_cmd->add_option("--lambda-d", lambda_d, "damping wavelength [m]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(common, sa);
    if (coupling->parsed()) return cmd_coupling(common, ca);
    if (effective->parsed()) return cmd_effective(common, ea);
    if (thermo->parsed()) return cmd_thermo(common, thermo_method);
    if (sde->parsed()) return cmd_sde(common, da);
    if (design_cmd->parsed()) return cmd_design(common, lambda_d);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_config_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
