#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdarray/numerics.hpp"

namespace sdarray {

inline constexpr double kSpeedOfLight = 299792458.0;      // m/s
inline constexpr double kMu0 = 4.0e-7 * kPi;               // H/m
inline constexpr double kZ0 = kMu0 * kSpeedOfLight;        // free-space impedance, ~376.73 ohm

/// Dipoles with length at or above this fraction of a wavelength are rejected:
/// the sinusoidal current normalisation sin(k*l/2) collapses near l = lambda.
inline constexpr double kMaxLengthOverLambda = 0.98;

/// Single-frequency carrier.
class CarrierSpec {
 public:
  explicit CarrierSpec(double frequency_hz);

  double frequency() const noexcept { return frequency_; }
  double wavelength() const noexcept { return kSpeedOfLight / frequency_; }
  double wavenumber() const noexcept { return 2.0 * kPi * frequency_ / kSpeedOfLight; }

 private:
  double frequency_;
};

struct DipoleSpec {
  double length;        // m
  double radius;        // m
  double conductivity;  // S/m; +inf means a perfect conductor
};

/// Side-by-side z-directed dipoles sharing one element description.
struct ArrayGeometry {
  std::vector<Eigen::Vector3d> positions;
  DipoleSpec element;

  std::size_t size() const noexcept { return positions.size(); }

  /// Checks N >= 1, 0 < radius << length, conductivity > 0, and that wires do
  /// not overlap. Throws GeometryError / DomainError.
  void validate() const;

  /// Uniform linear array along x with positions (n*d, 0, 0).
  static ArrayGeometry uniform_linear(std::size_t count, double spacing, DipoleSpec element);
};

/// Receiver direction in spherical angles (radians).
struct Direction {
  double theta;
  double phi;

  Eigen::Vector3d unit_vector() const;
  void validate() const;
};

/// Isolated-dipole field pattern F(theta); theta = 0 and pi return the analytic limit 0.
/// Throws ModelValidityError if k*l is outside (0, 2*pi*0.98).
double element_pattern(double length, double wavenumber, double theta);

/// Skin-effect loss resistance per unit length, ohm/m.
double loss_resistance_per_length(double radius, double frequency, double conductivity);

/// Loss resistance referred to the feed current under the sinusoidal current model.
double loss_resistance(const DipoleSpec& spec, const CarrierSpec& carrier);

/// Sinusoidal current of a center-fed dipole, normalised to the feed current.
double scd_shape(double z, double length, double wavenumber);

ComplexVector steering_vector(const ArrayGeometry& geom, const Direction& dir, double wavenumber);

/// Far-field E_theta at distance r for feed currents i (V/m).
cd scd_field_magnitude(const ArrayGeometry& geom, const Direction& dir, const CarrierSpec& carrier,
                       const ComplexVector& currents, double r);

/// Radiation intensity (W/sr) for feed currents i.
double radiation_intensity(const ArrayGeometry& geom, const Direction& dir,
                           const CarrierSpec& carrier, const ComplexVector& currents);

/// Returns a warning message when r is not comfortably in the array's far field.
std::optional<std::string> far_field_warning(const ArrayGeometry& geom, const CarrierSpec& carrier,
                                             double r);

}  // namespace sdarray
