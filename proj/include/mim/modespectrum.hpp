#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace mim {

// Three-mirror resonator: end mirrors at x = +-L, middle mirror at x = q.
struct CavityGeometry {
  double length = 5e-3;               // L, sub-cavity length [m]
  double transmissivity = 1e-4;       // T, middle mirror (intensity)
  double end_transmissivity = 1e-5;   // T_end
  std::optional<double> decay_rate_override;  // gamma [1/s], replaces c T_end / 2L

  // Throws Error(invalid_argument) on L <= 0 or transmissivities outside [0, 1].
  void validate() const;

  double round_trip_time() const;  // tau = 2L/c
  double decay_rate() const;       // gamma = c T_end / 2L unless overridden
  double free_spectral_range() const;  // pi c / L, spacing of the omega_n ladder [rad/s]

  // gamma implied by a sub-cavity finesse: FSR / F.
  static double decay_rate_from_finesse(double length, double finesse);
};

// Longitudinal mode order. Integer orders come from the mode ladder
// omega_n = n pi c / L; fractional orders describe a laser wavelength that
// is not exactly resonant (n = 2L / lambda).
class Mode {
 public:
  Mode(int n);  // NOLINT: implicit on purpose, throws invalid_mode_number for n < 1
  static Mode at_wavelength(const CavityGeometry& geom, double wavelength);

  double order() const { return order_; }
  bool is_integer() const;
  int number() const;  // throws unless is_integer()

  double frequency(const CavityGeometry& geom) const;   // omega_n [rad/s]
  double wavenumber(const CavityGeometry& geom) const;  // k_n [rad/m]
  double wavelength(const CavityGeometry& geom) const;  // lambda_n = 2L/n [m]

 private:
  struct FromOrder {};
  Mode(FromOrder, double order) : order_(order) {}
  double order_;
};

enum class Branch { even, odd };
std::string_view to_string(Branch b);
Branch branch_from_string(std::string_view s);

struct ModeBranchPoint {
  double mode_order;
  Branch branch;
  double position;  // q [m]
  double omega;     // [rad/s]
};

struct BranchPair {
  double even;  // omega_{n,e}
  double odd;   // omega_{n,o}
  // |q| is beyond lambda_n / 2, where the closed form is being stretched.
  bool beyond_recommended = false;
};

struct WavenumberWindow {
  double lo;
  double hi;
};

// A root of the three-mirror resonance condition. `order` counts the roots
// from k = 0 (first root has order 1); the doublet around omega_n consists
// of orders 2n (even branch) and 2n + 1 (odd branch).
struct ResonatorRoot {
  long order;
  double wavenumber;
};

// omega_n = n pi c / L.
double reference_frequency(const CavityGeometry& geom, Mode n);

// 2 k_n q / pi = 4 q / lambda_n, snapped onto the integer lattice when within
// rounding of a quarter-wave point so that trig functions of it are exact there.
double quarter_wave_phase(const CavityGeometry& geom, Mode n, double q);

// All roots of cot k(L+q) + cot k(L-q) = 2 sqrt((1-T)/T) inside `window`,
// bracketed between consecutive cotangent singularities and polished to
// 1e-12 relative.
std::vector<double> exact_wavenumbers(const CavityGeometry& geom, double q,
                                      WavenumberWindow window);
std::vector<ResonatorRoot> exact_roots(const CavityGeometry& geom, double q,
                                       WavenumberWindow window);

// Doublet around omega_n from the exact roots, labelled by root order.
BranchPair exact_branch_frequencies(const CavityGeometry& geom, int n, double q);

// Closed-form doublet frequencies. Throws out_of_validity_range for |q| > lambda_n.
BranchPair branch_frequencies(const CavityGeometry& geom, Mode n, double q);

// The same doublet as offsets from omega_n. Finite differences in q should be
// taken on these, since omega_n itself swamps the shifts in double precision.
BranchPair branch_offsets(const CavityGeometry& geom, Mode n, double q);

enum class SpectrumMethod { closed_form, exact };

std::vector<ModeBranchPoint> spectrum_sweep(const CavityGeometry& geom,
                                            const std::vector<int>& modes,
                                            const std::vector<double>& positions,
                                            SpectrumMethod method = SpectrumMethod::closed_form);

}  // namespace mim
