#include "mim/modespectrum.hpp"

#include <algorithm>
#include <boost/math/special_functions/sin_pi.hpp>
#include <boost/math/special_functions/cos_pi.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "mim/constants.hpp"
#include "mim/error.hpp"

namespace mim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_mode_number: return "invalid-mode-number";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::degenerate_equation: return "degenerate-equation";
    case ErrorCode::window_too_narrow: return "window-too-narrow";
    case ErrorCode::out_of_validity_range: return "out-of-validity-range";
    case ErrorCode::wrong_regime: return "wrong-regime";
    case ErrorCode::divergent_coupling: return "divergent-coupling";
    case ErrorCode::antitrapping_configuration: return "antitrapping-configuration";
    case ErrorCode::divergent_integral: return "divergent-integral";
    case ErrorCode::integration_failure: return "integration-failure";
    case ErrorCode::degenerate_parameters: return "degenerate-parameters";
    case ErrorCode::unstable_system: return "unstable-system";
    case ErrorCode::step_size: return "step-size-error";
    case ErrorCode::statistics: return "statistics-error";
    case ErrorCode::fit: return "fit-error";
    case ErrorCode::design_infeasible: return "design-infeasible";
    case ErrorCode::placement: return "placement-error";
    case ErrorCode::unstable_design: return "unstable-design";
    case ErrorCode::config: return "config-error";
  }
  return "unknown-error";
}

void CavityGeometry::validate() const {
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorCode::invalid_argument, "sub-cavity length must be positive");
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
    throw Error(ErrorCode::invalid_argument, "middle-mirror transmissivity must lie in [0, 1]");
  if (!(end_transmissivity >= 0.0 && end_transmissivity <= 1.0))
    throw Error(ErrorCode::invalid_argument, "end-mirror transmissivity must lie in [0, 1]");
  if (decay_rate_override && !(*decay_rate_override > 0.0))
    throw Error(ErrorCode::invalid_argument, "decay-rate override must be positive");
}

double CavityGeometry::round_trip_time() const { return 2.0 * length / kSpeedOfLight; }

double CavityGeometry::decay_rate() const {
  if (decay_rate_override) return *decay_rate_override;
  return kSpeedOfLight * end_transmissivity / (2.0 * length);
}

double CavityGeometry::free_spectral_range() const { return kPi * kSpeedOfLight / length; }

double CavityGeometry::decay_rate_from_finesse(double length, double finesse) {
  if (!(length > 0.0) || !(finesse > 0.0))
    throw Error(ErrorCode::invalid_argument, "finesse and length must be positive");
  return kPi * kSpeedOfLight / (length * finesse);
}

Mode::Mode(int n) : order_(n) {
  if (n < 1) throw Error(ErrorCode::invalid_mode_number, "mode number must be >= 1, got " + std::to_string(n));
}

Mode Mode::at_wavelength(const CavityGeometry& geom, double wavelength) {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw Error(ErrorCode::invalid_argument, "wavelength must be positive");
  const double order = 2.0 * geom.length / wavelength;
  if (order < 1.0) throw Error(ErrorCode::invalid_mode_number, "wavelength longer than 2L");
  return Mode(FromOrder{}, order);
}

bool Mode::is_integer() const { return order_ == std::round(order_); }

int Mode::number() const {
  if (!is_integer()) throw Error(ErrorCode::invalid_mode_number, "mode order is not an integer");
  return static_cast<int>(order_);
}

double Mode::frequency(const CavityGeometry& geom) const {
  return order_ * kPi * kSpeedOfLight / geom.length;
}

double Mode::wavenumber(const CavityGeometry& geom) const { return order_ * kPi / geom.length; }

double Mode::wavelength(const CavityGeometry& geom) const { return 2.0 * geom.length / order_; }

std::string_view to_string(Branch b) { return b == Branch::even ? "even" : "odd"; }

Branch branch_from_string(std::string_view s) {
  if (s == "even") return Branch::even;
  if (s == "odd") return Branch::odd;
  throw Error(ErrorCode::config, "branch must be 'even' or 'odd', got '" + std::string(s) + "'");
}

double reference_frequency(const CavityGeometry& geom, Mode n) {
  geom.validate();
  return n.frequency(geom);
}

double quarter_wave_phase(const CavityGeometry& geom, Mode n, double q) {
  const double x = 2.0 * n.order() * q / geom.length;
  const double lattice = std::round(x);
  if (std::abs(x - lattice) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
    return lattice;
  return x;
}

namespace {

// A cotangent singularity k = m pi / (L + sign q).
struct Singularity {
  long m;
  int sign;
  double k;
};

struct RootProblem {
  double length;
  double q;
  double rhs;  // 2 sqrt((1-T)/T)

  double arm(int sign) const { return length + sign * q; }

  // k_a - k_b, computed from the integer indices to avoid cancellation.
  double separation(const Singularity& a, const Singularity& b) const {
    const double la = arm(a.sign);
    const double lb = arm(b.sign);
    const double num = static_cast<double>(a.m - b.m) * length +
                       (static_cast<double>(a.m) * b.sign - static_cast<double>(b.m) * a.sign) * q;
    return kPi * num / (la * lb);
  }

  bool before(const Singularity& a, const Singularity& b) const {
    const double d = separation(a, b);
    const double scale = std::max(a.k, b.k) * 8.0 * std::numeric_limits<double>::epsilon();
    if (std::abs(d) <= scale) return a.sign > b.sign;  // coincident: + family first
    return d < 0.0;
  }

  bool coincident(const Singularity& a, const Singularity& b) const {
    return std::abs(separation(a, b)) <= std::max(a.k, b.k) * 8.0 * std::numeric_limits<double>::epsilon();
  }

  // Number of singularities (m >= 1, both families) ordered before `s`.
  long position(const Singularity& s) const {
    const int other = -s.sign;
    long guess = static_cast<long>(std::floor(s.k * arm(other) / kPi));
    auto other_before = [&](long m) { return m >= 1 && before(Singularity{m, other, m * kPi / arm(other)}, s); };
    while (guess >= 1 && !other_before(guess)) --guess;
    while (other_before(guess + 1)) ++guess;
    return (s.m - 1) + std::max(0L, guess);
  }
};

// Reduced cotangent arguments for k = left.k + t in both families.
struct ReducedCot {
  double offset[2];  // k_left - m* pi / arm, per family
  double arm[2];

  ReducedCot(const RootProblem& p, const Singularity& left) {
    for (int i = 0; i < 2; ++i) {
      const int sign = i == 0 ? 1 : -1;
      arm[i] = p.arm(sign);
      if (sign == left.sign) {
        offset[i] = 0.0;
      } else {
        const long m = std::lround(left.k * arm[i] / kPi);
        offset[i] = p.separation(left, Singularity{m, sign, m * kPi / arm[i]});
      }
    }
  }

  double value(double t, double rhs) const {
    double v = -rhs;
    for (int i = 0; i < 2; ++i) v += 1.0 / std::tan((offset[i] + t) * arm[i]);
    return v;
  }

  double slope(double t) const {
    double v = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double s = std::sin((offset[i] + t) * arm[i]);
      v -= arm[i] / (s * s);
    }
    return v;
  }
};

// The resonance function is strictly decreasing from +inf to -inf on (0, width).
double solve_interval(const ReducedCot& f, double rhs, double width, double k_left) {
  double lo = 0.0;
  double hi = width;
  double t = 0.5 * width;
  for (int i = 0; i < 200 && (hi - lo) > 1e-4 * width; ++i) {
    t = 0.5 * (lo + hi);
    if (f.value(t, rhs) > 0.0) lo = t; else hi = t;
  }
  t = 0.5 * (lo + hi);
  for (int i = 0; i < 100; ++i) {
    const double v = f.value(t, rhs);
    if (v > 0.0) lo = t; else hi = t;
    double next = t - v / f.slope(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - t);
    t = next;
    if (step <= 1e-15 * (k_left + t) || hi - lo <= 1e-15 * (k_left + t)) break;
  }
  return t;
}

}  // namespace

std::vector<ResonatorRoot> exact_roots(const CavityGeometry& geom, double q, WavenumberWindow window) {
  geom.validate();
  const double T = geom.transmissivity;
  if (T == 0.0)
    throw Error(ErrorCode::degenerate_equation,
                "T = 0 decouples the sub-cavities; use omega = n pi c / (L +- q)");
  if (!(std::abs(q) < geom.length))
    throw Error(ErrorCode::invalid_argument, "middle mirror must satisfy |q| < L");
  if (!(window.lo >= 0.0 && window.hi > window.lo && std::isfinite(window.hi)))
    throw Error(ErrorCode::invalid_argument, "wavenumber window must be positive and finite");

  const RootProblem problem{geom.length, q, 2.0 * std::sqrt((1.0 - T) / T)};

  // Each family is generated two spacings past the window; the merged list is
  // then clipped to the range both families cover so that it has no gaps.
  std::vector<Singularity> sing;
  double k_floor = 0.0;
  double k_ceil = std::numeric_limits<double>::infinity();
  for (int sign : {1, -1}) {
    const double arm = problem.arm(sign);
    const long m_lo = std::max(1L, static_cast<long>(std::floor(window.lo * arm / kPi)) - 2);
    const long m_hi = static_cast<long>(std::ceil(window.hi * arm / kPi)) + 2;
    for (long m = m_lo; m <= m_hi; ++m) sing.push_back({m, sign, m * kPi / arm});
    if (m_lo > 1) k_floor = std::max(k_floor, m_lo * kPi / arm);
    k_ceil = std::min(k_ceil, m_hi * kPi / arm);
  }
  std::erase_if(sing, [&](const Singularity& s) { return s.k < k_floor || s.k > k_ceil; });
  std::sort(sing.begin(), sing.end(),
            [&](const Singularity& a, const Singularity& b) { return problem.before(a, b); });

  std::vector<ResonatorRoot> roots;
  long pos = problem.position(sing.front());

  // Interval (0, first singularity) when the window reaches down to it.
  if (pos == 0) {
    const Singularity origin{0, 1, 0.0};
    const ReducedCot f(problem, origin);
    const double t = solve_interval(f, problem.rhs, sing.front().k, 0.0);
    if (t >= window.lo && t <= window.hi) roots.push_back({1, t});
  }

  for (std::size_t i = 0; i + 1 < sing.size(); ++i, ++pos) {
    const Singularity& left = sing[i];
    const Singularity& right = sing[i + 1];
    const long order = pos + 2;
    double k;
    if (problem.coincident(left, right)) {
      // Both sines vanish together; sin(2kL) = 2s sin k(L+q) sin k(L-q) holds there.
      k = left.k;
    } else {
      const double width = problem.separation(right, left);
      const ReducedCot f(problem, left);
      k = left.k + solve_interval(f, problem.rhs, width, left.k);
    }
    if (k >= window.lo && k <= window.hi) roots.push_back({order, k});
  }

  if (roots.empty())
    throw Error(ErrorCode::window_too_narrow, "no resonance bracketed inside the wavenumber window");
  return roots;
}

std::vector<double> exact_wavenumbers(const CavityGeometry& geom, double q, WavenumberWindow window) {
  std::vector<double> out;
  for (const auto& r : exact_roots(geom, q, window)) out.push_back(r.wavenumber);
  return out;
}

BranchPair exact_branch_frequencies(const CavityGeometry& geom, int n, double q) {
  const Mode mode(n);
  const double kn = mode.wavenumber(geom);
  const double spacing = kPi / geom.length;
  const WavenumberWindow window{std::max(0.0, kn - spacing), kn + spacing};
  BranchPair out{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  for (const auto& r : exact_roots(geom, q, window)) {
    if (r.order == 2L * n) out.even = kSpeedOfLight * r.wavenumber;
    if (r.order == 2L * n + 1) out.odd = kSpeedOfLight * r.wavenumber;
  }
  if (std::isnan(out.even) || std::isnan(out.odd))
    throw Error(ErrorCode::window_too_narrow, "doublet of mode " + std::to_string(n) + " not found");
  out.beyond_recommended = std::abs(q) > 0.5 * mode.wavelength(geom);
  return out;
}

BranchPair branch_offsets(const CavityGeometry& geom, Mode n, double q) {
  geom.validate();
  const double lambda = n.wavelength(geom);
  if (!(std::abs(q) <= lambda))
    throw Error(ErrorCode::out_of_validity_range, "closed-form branches require |q| <= lambda_n");
  const double tau = geom.round_trip_time();
  const double amp = std::sqrt(1.0 - geom.transmissivity);
  const double c2kq = boost::math::cos_pi(quarter_wave_phase(geom, n, q));
  const double moving = std::asin(amp * c2kq);
  const double fixed = std::asin(amp);
  BranchPair out;
  out.even = (moving - fixed) / tau;
  out.odd = (kPi - moving - fixed) / tau;
  out.beyond_recommended = std::abs(q) > 0.5 * lambda;
  return out;
}

BranchPair branch_frequencies(const CavityGeometry& geom, Mode n, double q) {
  BranchPair out = branch_offsets(geom, n, q);
  const double wn = n.frequency(geom);
  out.even += wn;
  out.odd += wn;
  return out;
}

std::vector<ModeBranchPoint> spectrum_sweep(const CavityGeometry& geom, const std::vector<int>& modes,
                                            const std::vector<double>& positions, SpectrumMethod method) {
  std::vector<ModeBranchPoint> table;
  table.reserve(modes.size() * positions.size() * 2);
  for (int n : modes) {
    const Mode mode(n);
    for (double q : positions) {
      const BranchPair p = method == SpectrumMethod::exact ? exact_branch_frequencies(geom, n, q)
                                                           : branch_frequencies(geom, mode, q);
      table.push_back({mode.order(), Branch::even, q, p.even});
      table.push_back({mode.order(), Branch::odd, q, p.odd});
    }
  }
  return table;
}

}  // namespace mim
