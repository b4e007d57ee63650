#include "mim/config.hpp"

#include <fstream>
#include <set>

#include "mim/constants.hpp"
#include "mim/error.hpp"

namespace mim {

using nlohmann::json;

double RunConfig::quadratic_window() const { return window_fraction * Mode(mode).wavelength(geometry); }

RunConfig default_config() { return RunConfig{}; }

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::config, msg); }

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::optional<double> number(const std::string& key) {
    if (!j_.contains(key)) return std::nullopt;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number()) fail(where(key) + " must be a number");
    return v.get<double>();
  }

  std::optional<long> integer(const std::string& key) {
    if (!j_.contains(key)) return std::nullopt;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(where(key) + " must be an integer");
    return v.get<long>();
  }

  std::optional<bool> boolean(const std::string& key) {
    if (!j_.contains(key)) return std::nullopt;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(where(key) + " must be true or false");
    return v.get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    if (!j_.contains(key)) return std::nullopt;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_string()) fail(where(key) + " must be a string");
    return v.get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    if (!j_.contains(key)) return std::nullopt;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_array()) fail(where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(where(key) + " must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  // Angular frequency from `<base>_rad_s` or `<base>_hz`; both at once is an error.
  std::optional<double> frequency(const std::string& base) {
    const auto rad = number(base + "_rad_s");
    const auto hz = number(base + "_hz");
    if (rad && hz) fail(path_ + ": give either " + base + "_rad_s or " + base + "_hz, not both");
    if (hz) return hz_to_angular(*hz);
    return rad;
  }

  const json* child(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail("unknown key " + where(it.key()));
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double positive_int(std::optional<long> v, double fallback, const std::string& what) {
  if (!v) return fallback;
  if (*v < 1) fail(what + " must be >= 1");
  return static_cast<double>(*v);
}

void parse_geometry(const json& j, CavityGeometry& g) {
  Section s(j, "geometry");
  if (auto v = s.number("L_m")) g.length = *v;
  if (auto v = s.number("T_mid")) g.transmissivity = *v;
  if (auto v = s.number("T_end")) g.end_transmissivity = *v;
  const auto gamma = s.frequency("gamma");
  const auto finesse = s.number("finesse");
  if (gamma && finesse) fail("geometry: give either a decay rate or a finesse, not both");
  if (gamma) g.decay_rate_override = *gamma;
  if (finesse) g.decay_rate_override = CavityGeometry::decay_rate_from_finesse(g.length, *finesse);
  s.finish();
}

void parse_mechanics(const json& j, MechanicalOscillator& m, double lambda) {
  Section s(j, "mechanics");
  if (auto v = s.number("mass_kg")) m.mass = *v;
  if (auto v = s.frequency("omega_M")) m.omega_M = *v;
  const auto damping = s.number("D_M_kg_s");
  const auto quality = s.number("Q");
  if (damping && quality) fail("mechanics: give either D_M_kg_s or Q, not both");
  if (damping) m.damping = *damping;
  if (quality) {
    if (!(*quality > 0.0)) fail("mechanics.Q must be positive");
    m.damping = MechanicalOscillator::damping_from_quality(m.mass, m.omega_M, *quality);
  }
  if (auto v = s.number("T_e_K")) m.bath_temperature = *v;
  const auto q0 = s.number("q0_m");
  const auto q0_rel = s.number("q0_over_lambda");
  if (q0 && q0_rel) fail("mechanics: give either q0_m or q0_over_lambda, not both");
  if (q0) m.rest_position = *q0;
  if (q0_rel) m.rest_position = *q0_rel * lambda;
  s.finish();
}

DriveField parse_drive(const json& j, const std::string& path, double gamma) {
  Section s(j, path);
  DriveField d;
  if (auto v = s.number("power_W")) d.power = *v;
  const auto abs = s.frequency("detuning");
  const auto rel = s.number("detuning_over_gamma");
  if (abs && rel) fail(path + ": give one detuning key only");
  if (abs) d.detuning = *abs;
  if (rel) d.detuning = *rel * gamma;
  if (auto b = s.string("branch")) d.branch = branch_from_string(*b);
  s.finish();
  d.validate();
  return d;
}

Regime regime_from_string(const std::string& s) {
  if (s == "linear") return Regime::linear;
  if (s == "quadratic") return Regime::quadratic;
  fail("regime must be 'linear' or 'quadratic', got '" + s + "'");
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig c = default_config();
  Section top(j, "config");
  if (const json* g = top.child("geometry")) parse_geometry(*g, c.geometry);
  c.geometry.validate();
  if (auto n = top.integer("mode_number")) {
    if (*n < 1) fail("mode_number must be >= 1");
    c.mode = static_cast<int>(*n);
  }
  const double lambda = Mode(c.mode).wavelength(c.geometry);
  const double gamma = c.geometry.decay_rate();
  if (const json* m = top.child("mechanics")) parse_mechanics(*m, c.mechanics, lambda);
  c.mechanics.validate();
  if (auto r = top.string("regime")) c.regime = regime_from_string(*r);
  if (auto w = top.number("quadratic_window_over_lambda")) {
    if (!(*w > 0.0)) fail("quadratic_window_over_lambda must be positive");
    c.window_fraction = *w;
  }
  if (const json* d = top.child("drives")) {
    if (!d->is_array()) fail("drives must be an array");
    c.drives.clear();
    for (std::size_t i = 0; i < d->size(); ++i)
      c.drives.push_back(parse_drive((*d)[i], "drives[" + std::to_string(i) + "]", gamma));
  }

  if (const json* sp = top.child("spectrum")) {
    Section s(*sp, "spectrum");
    if (const json* modes = s.child("modes")) {
      if (!modes->is_array() || modes->empty()) fail("spectrum.modes must be a non-empty array of integers");
      c.spectrum.modes.clear();
      for (const auto& m : *modes) {
        if (!m.is_number_integer() || m.get<long>() < 1) fail("spectrum.modes entries must be integers >= 1");
        c.spectrum.modes.push_back(m.get<int>());
      }
    }
    c.spectrum.q_min = s.number("q_min_m");
    c.spectrum.q_max = s.number("q_max_m");
    c.spectrum.q_points = static_cast<int>(positive_int(s.integer("q_points"), c.spectrum.q_points, "spectrum.q_points"));
    if (auto m = s.string("method")) {
      if (*m == "closed-form") c.spectrum.method = SpectrumMethod::closed_form;
      else if (*m == "exact") c.spectrum.method = SpectrumMethod::exact;
      else fail("spectrum.method must be 'closed-form' or 'exact'");
    }
    s.finish();
  }

  if (const json* cp = top.child("coupling")) {
    Section s(*cp, "coupling");
    if (auto t = s.numbers("T_list")) {
      if (t->empty()) fail("coupling.T_list must not be empty");
      c.coupling.transmissivities = *t;
    }
    c.coupling.q0_min = s.number("q0_min_m");
    c.coupling.q0_max = s.number("q0_max_m");
    c.coupling.q0_points =
        static_cast<int>(positive_int(s.integer("q0_points"), c.coupling.q0_points, "coupling.q0_points"));
    s.finish();
  }

  if (const json* ef = top.child("effective")) {
    Section s(*ef, "effective");
    if (auto v = s.frequency("omega_min")) c.effective.omega_min = *v;
    c.effective.omega_max = s.frequency("omega_max");
    c.effective.omega_points =
        static_cast<int>(positive_int(s.integer("omega_points"), c.effective.omega_points, "effective.omega_points"));
    s.finish();
  }

  if (const json* sd = top.child("sde")) {
    Section s(*sd, "sde");
    c.sde.dt = s.number("dt_s");
    c.sde.duration = s.number("duration_s");
    c.sde.n_traj = static_cast<int>(positive_int(s.integer("n_traj"), c.sde.n_traj, "sde.n_traj"));
    if (auto v = s.integer("seed")) c.sde.seed = static_cast<std::uint64_t>(*v);
    c.sde.burn_in = s.number("burn_in_s");
    if (auto v = s.string("integrator")) c.sde.integrator = integrator_from_string(*v);
    c.sde.threads = static_cast<int>(positive_int(s.integer("threads"), c.sde.threads, "sde.threads"));
    if (auto v = s.integer("segment_length")) c.sde.segment_length = *v;
    if (auto v = s.boolean("allow_unstable")) c.sde.allow_unstable = *v;
    s.finish();
  }

  if (const json* de = top.child("design")) {
    Section s(*de, "design");
    auto& b = c.design.bichromatic;
    c.design.lambda_d = s.number("lambda_d_m");
    if (auto v = s.number("lambda_t_m")) b.lambda_t = *v;
    if (auto v = s.number("offset_fraction")) b.offset_fraction = *v;
    if (auto v = s.number("trap_power_W")) b.trap.power = *v;
    const auto trap_abs = s.frequency("trap_detuning");
    const auto trap_rel = s.number("trap_detuning_over_gamma");
    if (trap_abs && trap_rel) fail("design: give one trap detuning key only");
    if (trap_abs) b.trap.detuning = *trap_abs;
    if (trap_rel) b.trap.detuning = *trap_rel * gamma;
    if (auto v = s.number("damp_power_W")) b.damp_power = *v;
    if (auto v = s.number("damp_detuning_over_gamma")) b.damp_detuning_over_gamma = *v;
    if (auto v = s.number("separation_threshold")) b.separation_threshold = *v;
    if (auto v = s.number("reference_trap_power_W")) c.design.reference_trap.power = *v;
    if (auto v = s.number("reference_trap_detuning_over_gamma")) c.design.reference_trap_detuning_over_gamma = *v;
    c.design.reference_q0 = s.number("reference_q0_m");
    s.finish();
  }
  c.design.bichromatic.window_fraction = c.window_fraction;

  top.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

}  // namespace mim
