#pragma once

#include <optional>
#include <vector>

#include "sdarray/coupling.hpp"

namespace sdarray {

enum class MatchMode {
  active_conjugate,  // Z_M,n = conj([Z_a]_nn) for the excitation being transmitted
  input_conjugate,   // Z_M,n = conj([Z_in]_nn)
  custom,            // caller-supplied Z_M
};

struct MatchSpec {
  MatchMode mode = MatchMode::active_conjugate;
  ComplexVector z_match;  // diagonal of Z_M; only read for `custom`

  /// Throws DomainError if any Re{Z_M,n} < 0 or the size is wrong.
  void validate(std::size_t ports) const;
};

struct PowerBreakdown {
  double radiated = 0.0;  // P_rad
  double loss = 0.0;      // P_loss
  double input = 0.0;     // P_in = P_rad + P_loss
  double total = 0.0;     // P_total, including the matching impedances

  /// eta = P_in / P_total (0 when nothing is transmitted).
  double matching_efficiency() const noexcept { return total > 0.0 ? input / total : 0.0; }
};

struct ExcitationSolution {
  ComplexVector currents;                      // feed currents, A
  ComplexVector voltages;                      // v = Z_in i, V
  std::vector<std::optional<cd>> z_active;     // [Z_a]_nn; empty where i_n ~ 0
  ComplexVector z_match;                       // diagonal of Z_M actually used
  ComplexVector reflection;                    // Gamma_n
  PowerBreakdown powers;
  double efficiency = 0.0;                     // eta
  double gain = 0.0;                           // G at the design direction
};

/// Deterministic line-of-sight Friis link.
struct LinkSpec {
  double bandwidth;       // W, Hz
  double noise_density;   // sigma_n^2, W/Hz
  double power_budget;    // P_t, W
  double range;           // r, m
  Direction direction;

  void validate() const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double to_db(double linear);

/// Excitation maximising eta*G with P_total = P_t. For active-conjugate
/// matching this is i proportional to Re{Z_in}^-1 a; otherwise C^-1 a with
/// C = Re{Z_M} + Re{Z_in}. Throws ConditioningError if C is singular.
ComplexVector optimal_currents(const ImpedanceSet& set, const MatchSpec& match,
                               const Direction& dir, double power_budget);

/// Active impedances; throws DomainError naming the first port whose current
/// is below 1e-12 ||i||.
ComplexVector active_impedances(const ImpedanceSet& set, const ComplexVector& currents);

/// Per-port active impedance, empty where the port current vanishes.
std::vector<std::optional<cd>> active_impedance_entries(const ImpedanceSet& set,
                                                        const ComplexVector& currents);

/// Gamma = (Z_a - conj(Z_M)) / (Z_a + Z_M).
cd reflection_coefficient(cd z_active, cd z_match);

/// Diagonal of Z_M prescribed by `match` for the given currents.
ComplexVector matching_impedances(const ImpedanceSet& set, const MatchSpec& match,
                                  const ComplexVector& currents);

PowerBreakdown power_breakdown(const ImpedanceSet& set, const ComplexVector& z_match,
                               const ComplexVector& currents);

/// G = (Z0 F^2 / pi) |a^H i|^2 / (i^H Re{Z_in} i).
double array_gain(const ImpedanceSet& set, const Direction& dir, const ComplexVector& currents);

/// G_max = (Z0 F^2 / pi) a^H Re{Z_in}^-1 a.
double g_max(const ImpedanceSet& set, const Direction& dir);

/// Optimal excitation plus everything derived from it.
ExcitationSolution solve_excitation(const ImpedanceSet& set, const MatchSpec& match,
                                    const Direction& dir, double power_budget);

struct LinkResult {
  double received_power;  // W
  double rate;            // bit/s
};

/// P_r = eta P_t (lambda / 4 pi r)^2 G, R = W log2(1 + P_r / (W sigma_n^2)).
LinkResult received_power_and_rate(const LinkSpec& link, double wavelength, double efficiency,
                                   double gain);

}  // namespace sdarray
