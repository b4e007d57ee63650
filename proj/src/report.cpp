#include "mim/report.hpp"

#include <charconv>
#include <cmath>

#include "mim/constants.hpp"
#include "mim/error.hpp"

namespace mim {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<Cell> cells) {
  if (cells.size() != width_) throw Error(ErrorCode::invalid_argument, "CSV row width does not match header");
  bool first = true;
  for (const Cell& c : cells) {
    if (!first) out_ << ',';
    first = false;
    if (const double* d = std::get_if<double>(&c)) out_ << format_number(*d);
    else if (const long* l = std::get_if<long>(&c)) out_ << *l;
    else out_ << std::get<std::string>(c);
  }
  out_ << '\n';
  ++rows_;
}

namespace {

// JSON has no inf/nan; emit them as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

json to_json(const CouplingConstants& c) {
  return {{"xi_rad_s_m", num(c.xi)},       {"xi_L_rad_s_m", num(c.xi_L)},
          {"xi_Q_rad_s_m2", num(c.xi_Q)},  {"delta_e_rad_s", num(c.delta_e)},
          {"delta_o_rad_s", num(c.delta_o)}, {"Delta_o_rad_s", num(c.Delta_o)},
          {"regime", std::string(to_string(c.regime))}};
}

json to_json(const SteadyState& s) { return {{"q_s_m", num(s.q)}, {"p_s_kg_m_s", num(s.p)}, {"b_s", num(s.b)}}; }

json to_json(const StabilityReport& r) {
  json ev = json::array();
  for (const auto& e : r.eigenvalues) ev.push_back({num(e.real()), num(e.imag())});
  return {{"eigenvalues_re_im", ev},
          {"max_real_part", num(r.max_real_part)},
          {"stable", r.stable},
          {"routh_hurwitz", r.routh_hurwitz}};
}

json to_json(const TrapFrequencyReport& r) {
  return {{"omega_max_rad_s", num(r.omega_max)},
          {"omega_eff_delta0_rad_s", num(r.omega_eff_at_zero)},
          {"optical_spring_ratio", num(r.excess_ratio)},
          {"discrepancy", r.discrepancy},
          {"note", "the general-detuning formula at delta = 0 gives twice the optical spring of the "
                   "resonant trap-frequency formula"}};
}

json to_json(const ThermalSummary& s) {
  return {{"omega_eff_rad_s", num(s.omega_eff)},
          {"omega_eff_hz", num(angular_to_hz(s.omega_eff))},
          {"D_eff_kg_s", num(s.damping)},
          {"integral", num(s.integral)},
          {"variance_m2", num(s.variance)},
          {"T_eff_K", num(s.T_eff)},
          {"n_M", num(s.n_M)},
          {"omega_c_rad_s", num(s.omega_c)},
          {"validity_ratio", num(s.validity_ratio)},
          {"validity_ok", s.validity_ok},
          {"integral_method", std::string(to_string(s.method))}};
}

json to_json(const BichromaticDesign& d) {
  return {{"lambda_t_m", num(d.lambda_t)},
          {"lambda_d_m", num(d.lambda_d)},
          {"lambda_t_over_lambda_d", num(d.lambda_t / d.lambda_d)},
          {"q0_m", num(d.q0)},
          {"offset_from_damp_maximum_m", num(d.offset)},
          {"mode_separation_rad_s", num(d.mode_separation)},
          {"separation_over_gamma", num(d.separation_ratio)},
          {"trap_mode_order", num(d.trap_order)},
          {"damp_mode_order", num(d.damp_order)},
          {"trap_regime", std::string(to_string(d.trap_regime))},
          {"damp_regime", std::string(to_string(d.damp_regime))},
          {"xi_Q_trap_rad_s_m2", num(d.xi_Q_trap)},
          {"xi_L_damp_rad_s_m", num(d.xi_L_damp)},
          {"swept_q0_m", num(d.swept_q0)},
          {"swept_xi_L_rad_s_m", num(d.swept_xi_L)},
          {"trap_power_W", num(d.trap_drive.power)},
          {"trap_detuning_rad_s", num(d.trap_drive.detuning)},
          {"damp_power_W", num(d.damp_drive.power)},
          {"damp_detuning_rad_s", num(d.damp_drive.detuning)},
          {"trap_frequency", to_json(d.trap_frequency)}};
}

json to_json(const HybridPerformance& p) {
  return {{"omega_eff_rad_s", num(p.omega_eff)},
          {"D_eff_kg_s", num(p.damping)},
          {"trap_damping_kg_s", num(p.trap_damping)},
          {"T_eff_K", num(p.T_eff)},
          {"n_M", num(p.n_M)},
          {"trap_stability", to_json(p.trap_stability)},
          {"damp_stability", to_json(p.damp_stability)},
          {"combined_stability", to_json(p.combined_stability)}};
}

json to_json(const DampingComparison& c) {
  return {{"linear_only_D_kg_s", num(c.linear_only)},
          {"hybrid_D_kg_s", num(c.hybrid)},
          {"improvement_ratio", num(c.ratio)},
          {"cooling_contribution_kg_s", num(c.cooling_part)},
          {"linear_trap_contribution_kg_s", num(c.trap_part)}};
}

json to_json(const LorentzianFit& f) {
  return {{"amplitude", num(f.amplitude)},
          {"omega_eff_rad_s", num(f.omega_eff)},
          {"omega_eff_se_rad_s", num(f.omega_eff_se)},
          {"linewidth_rad_s", num(f.linewidth)},
          {"linewidth_se_rad_s", num(f.linewidth_se)},
          {"chi2_per_dof", num(f.chi2_per_dof)}};
}

}  // namespace mim
