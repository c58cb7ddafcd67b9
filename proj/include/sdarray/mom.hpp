#pragma once

#include "sdarray/design.hpp"

namespace sdarray {

/// Kernel used for the interaction of a wire with itself. Mutual terms always
/// use the reduced kernel with the axis-to-axis distance.
enum class WireKernel {
  exact,    // source current on the wire surface, averaged around the circumference
  reduced,  // R = sqrt((z - z')^2 + radius^2)
};

/// Pulse-basis sampling of every dipole: samples at z = m * spacing, m = -M..M.
struct MomDiscretization {
  int half_samples = 200;  // M
  WireKernel self_kernel = WireKernel::exact;

  int samples() const noexcept { return 2 * half_samples + 1; }
  double spacing(double length) const noexcept { return length / (2.0 * half_samples); }

  /// Requires M >= 10 and spacing < lambda / 10.
  void validate(const ArrayGeometry& geom, const CarrierSpec& carrier) const;

  /// From a total sample count 2M+1 (odd, >= 21).
  static MomDiscretization from_samples(int total_samples);
};

/// Current samples I_n(m * spacing) of all dipoles.
struct SampledCurrents {
  int half_samples = 0;
  double spacing = 0.0;
  ComplexMatrix values;  // row n = dipole, column m + M

  std::size_t dipoles() const noexcept { return static_cast<std::size_t>(values.rows()); }
  cd at(std::size_t dipole, int m) const {
    return values(static_cast<Eigen::Index>(dipole), m + half_samples);
  }
  /// Feed currents I_n(0).
  ComplexVector feed_currents() const { return values.col(half_samples); }
};

struct MomPowers {
  double radiated = 0.0;
  double loss = 0.0;
  double input() const noexcept { return radiated + loss; }
};

struct MomSolution {
  ComplexVector excitation;  // sinusoidal-model optimal currents that set v_in
  ComplexVector v_in;
  ComplexVector i_in;
  SampledCurrents currents;
  MomPowers powers;
  double gain = 0.0;  // at the design direction
};

/// Integral of exp(-jkR)/(4 pi R), R = sqrt(u^2 + d^2), over u in [lo, hi].
cd pulse_integral_reduced(double lo, double hi, double distance, double wavenumber);

/// Same with the source on a tube of radius `radius` and the observation point
/// on its surface (log-singular kernel).
cd pulse_integral_exact(double lo, double hi, double radius, double wavenumber);

/// Unfolded kernel matrix: entry ((p, i), (q, j)) is the pulse integral of
/// dipole q's sample j seen at dipole p's sample i; i, j = -M..M.
ComplexMatrix kernel_matrix(const ArrayGeometry& geom, const CarrierSpec& carrier,
                            const MomDiscretization& disc);

/// Solves the coupled Hallen equations for delta-gap voltages v_in with the
/// end currents forced to zero.
SampledCurrents hallen_solve(const ArrayGeometry& geom, const CarrierSpec& carrier,
                             const ComplexVector& v_in, const MomDiscretization& disc);

/// Pulse-basis space factor of one dipole, A*m.
cd space_factor(const SampledCurrents& currents, std::size_t dipole, double theta,
                double wavenumber);

/// Radiation intensity of the sampled currents, W/sr.
double mom_radiation_intensity(const ArrayGeometry& geom, const Direction& dir,
                               const CarrierSpec& carrier, const ComplexVector& space_factors);

/// P_rad from the port quantities, P_loss from the sampled currents.
/// Throws PassivityError if Re{v^H i} < -1e-9.
MomPowers mom_powers(const ComplexVector& v_in, const SampledCurrents& currents,
                     double loss_per_length);

/// 4 pi U / P_in for an existing solution, at any direction.
double mom_gain(const MomSolution& solution, const ArrayGeometry& geom, const CarrierSpec& carrier,
                const Direction& dir);

/// Sinusoidal-model excitation -> port voltages -> Hallen currents -> gain.
MomSolution mom_gain_pipeline(const ImpedanceSet& set, const Direction& dir, double power_budget,
                              const MomDiscretization& disc,
                              const MatchSpec& match = MatchSpec{});

MomSolution mom_gain_pipeline(const ArrayGeometry& geom, const CarrierSpec& carrier,
                              const Direction& dir, double power_budget,
                              const MomDiscretization& disc);

}  // namespace sdarray
