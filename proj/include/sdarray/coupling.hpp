#pragma once

#include <iosfwd>

#include "sdarray/em_core.hpp"

namespace sdarray {

/// Where an impedance matrix came from.
enum class ImpedanceSource {
  far_field_quadrature,  // spherical integral of the radiated power
  induced_emf,           // closed-form reaction integrals between sinusoidal currents
  hybrid,                // real part from quadrature, imaginary part from induced EMF
  uncoupled,             // diagonal only; mutual terms dropped
};

/// Impedance matrices of one array at one carrier.
///
/// `z_real` is the radiated-power matrix. `z_emf` holds the raw induced-EMF
/// mutual impedances. `z` is the lossless input impedance used everywhere
/// downstream: its real part is exactly `z_real` and its reactance comes from
/// `z_emf`, so that P_in = i^H Re{Z_in} i / 2 and the active-impedance
/// bookkeeping share one matrix.
struct ImpedanceSet {
  ArrayGeometry geometry;
  CarrierSpec carrier;
  double r_loss = 0.0;
  Eigen::MatrixXd z_real;
  ComplexMatrix z_emf;
  ComplexMatrix z;
  ImpedanceSource z_real_source = ImpedanceSource::far_field_quadrature;
  ImpedanceSource z_source = ImpedanceSource::hybrid;

  std::size_t size() const noexcept { return geometry.size(); }

  /// Z_in = R_loss I + Z.
  ComplexMatrix z_in() const;

  /// Re{Z_in} = R_loss I + Z_real.
  Eigen::MatrixXd re_z_in() const;
};

/// Controls the adaptive resolution of the far-field integral.
struct FarFieldQuadrature {
  std::size_t theta_nodes = 64;   // per panel
  std::size_t phi_nodes = 64;     // per panel; two panels by default
  double target_rel_tol = 1e-11;  // stop refining once successive levels agree to this
  double fail_rel_tol = 1e-6;     // resolution error beyond this at the finest level
  int max_doublings = 5;
};

/// Entry (n, m) of the radiated-power matrix, ohm.
double z_real_entry(const ArrayGeometry& geom, const CarrierSpec& carrier, std::size_t n,
                    std::size_t m, const FarFieldQuadrature& quad = {});

/// Full radiated-power matrix; upper triangle computed and mirrored.
Eigen::MatrixXd z_real_matrix(const ArrayGeometry& geom, const CarrierSpec& carrier,
                              const FarFieldQuadrature& quad = {});

/// Induced-EMF impedance between two side-by-side dipoles of equal length,
/// referred to the feed currents. n == m gives the self impedance with the wire
/// radius as the lateral distance.
cd mutual_impedance_emf(const ArrayGeometry& geom, const CarrierSpec& carrier, std::size_t n,
                        std::size_t m);

/// Same as above for an explicit lateral separation.
cd side_by_side_impedance(double length, double separation, double wavenumber);

/// Builds every matrix and checks Re{Z_emf} against Z_real (0.5 % relative);
/// throws ConsistencyError naming the worst entry on failure.
ImpedanceSet input_impedance_matrix(const ArrayGeometry& geom, const CarrierSpec& carrier,
                                    const FarFieldQuadrature& quad = {});

/// Drops all mutual terms: Z_real = R_i I, Z = diag(Z).
ImpedanceSet uncoupled(const ImpedanceSet& coupled);

/// Uncoupled set built from the self terms alone.
ImpedanceSet uncoupled(const ArrayGeometry& geom, const CarrierSpec& carrier,
                       const FarFieldQuadrature& quad = {});

/// Matrix dump: one row per line, entries "re+imj" separated by spaces.
void write_matrix(std::ostream& os, const ComplexMatrix& m);
ComplexMatrix read_matrix(std::istream& is);

}  // namespace sdarray
