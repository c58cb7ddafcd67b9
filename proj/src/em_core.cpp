#include "sdarray/em_core.hpp"

#include <algorithm>
#include <sstream>

namespace sdarray {

CarrierSpec::CarrierSpec(double frequency_hz) : frequency_(frequency_hz) {
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) {
    throw DomainError("CarrierSpec: frequency must be positive and finite");
  }
}

void ArrayGeometry::validate() const {
  if (positions.empty()) throw GeometryError("array must contain at least one dipole");
  if (!(element.length > 0.0)) throw DomainError("dipole length must be positive");
  if (!(element.radius > 0.0)) throw DomainError("dipole radius must be positive");
  if (!(element.radius < 0.1 * element.length)) {
    throw DomainError("dipole radius must be much smaller than its length (thin-wire model)");
  }
  if (!(element.conductivity > 0.0)) throw DomainError("conductivity must be positive");
  for (std::size_t n = 0; n < positions.size(); ++n) {
    for (std::size_t m = n + 1; m < positions.size(); ++m) {
      const double sep = (positions[n] - positions[m]).norm();
      if (!(sep > 2.0 * element.radius)) {
        std::ostringstream os;
        os << "dipoles " << n << " and " << m << " overlap (separation " << sep << " m)";
        throw GeometryError(os.str());
      }
    }
  }
}

ArrayGeometry ArrayGeometry::uniform_linear(std::size_t count, double spacing,
                                            DipoleSpec element) {
  ArrayGeometry g;
  g.element = element;
  g.positions.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    g.positions.emplace_back(static_cast<double>(n) * spacing, 0.0, 0.0);
  }
  return g;
}

Eigen::Vector3d Direction::unit_vector() const {
  const double st = std::sin(theta);
  return {std::cos(phi) * st, std::sin(phi) * st, std::cos(theta)};
}

void Direction::validate() const {
  if (!(theta >= 0.0 && theta <= kPi)) throw DomainError("polar angle must lie in [0, pi]");
  if (!std::isfinite(phi)) throw DomainError("azimuth must be finite");
}

namespace {

void check_model_validity(double kl) {
  if (!(kl > 0.0)) throw DomainError("dipole electrical length must be positive");
  if (kl >= 2.0 * kPi * kMaxLengthOverLambda) {
    std::ostringstream os;
    os << "dipole length " << kl / (2.0 * kPi)
       << " lambda is outside the sinusoidal-current model (must be < " << kMaxLengthOverLambda
       << " lambda)";
    throw ModelValidityError(os.str());
  }
}

}  // namespace

double element_pattern(double length, double wavenumber, double theta) {
  const double kl = wavenumber * length;
  check_model_validity(kl);
  const double st = std::sin(theta);
  if (theta <= 0.0 || theta >= kPi || st == 0.0) return 0.0;
  // cos(A cos t) - cos(A) = 2 sin(A (1 + cos t)/2) sin(A (1 - cos t)/2), with
  // 1 - cos t and 1 + cos t written through half angles to avoid cancellation.
  const double half = 0.5 * kl;
  const double one_minus = 2.0 * std::pow(std::sin(0.5 * theta), 2);
  const double one_plus = 2.0 * std::pow(std::cos(0.5 * theta), 2);
  const double num = 2.0 * std::sin(0.5 * half * one_plus) * std::sin(0.5 * half * one_minus);
  return num / (std::sin(half) * st);
}

double loss_resistance_per_length(double radius, double frequency, double conductivity) {
  if (!(radius > 0.0) || !(frequency > 0.0) || !(conductivity > 0.0)) {
    throw DomainError("loss_resistance_per_length: radius, frequency and conductivity must be positive");
  }
  return std::sqrt(frequency * kMu0 / (kPi * conductivity)) / (2.0 * radius);
}

double loss_resistance(const DipoleSpec& spec, const CarrierSpec& carrier) {
  const double k = carrier.wavenumber();
  const double kl = k * spec.length;
  check_model_validity(kl);
  if (!(spec.radius > 0.0) || !(spec.conductivity > 0.0)) {
    throw DomainError("loss_resistance: radius and conductivity must be positive");
  }
  const double s = std::sin(0.5 * kl);
  const double surface = std::sqrt(carrier.frequency() * kMu0 / (kPi * spec.conductivity));
  return (kl - std::sin(kl)) / (4.0 * k * spec.radius * s * s) * surface;
}

double scd_shape(double z, double length, double wavenumber) {
  const double half = 0.5 * length;
  if (std::abs(z) > half) return 0.0;
  return std::sin(wavenumber * (half - std::abs(z))) / std::sin(wavenumber * half);
}

ComplexVector steering_vector(const ArrayGeometry& geom, const Direction& dir, double wavenumber) {
  const Eigen::Vector3d rhat = dir.unit_vector();
  ComplexVector a(static_cast<Eigen::Index>(geom.size()));
  for (std::size_t n = 0; n < geom.size(); ++n) {
    const double phase = -wavenumber * rhat.dot(geom.positions[n]);
    a[static_cast<Eigen::Index>(n)] = std::polar(1.0, phase);
  }
  return a;
}

cd scd_field_magnitude(const ArrayGeometry& geom, const Direction& dir, const CarrierSpec& carrier,
                       const ComplexVector& currents, double r) {
  if (!(r > 0.0)) throw DomainError("scd_field_magnitude: distance must be positive");
  const double k = carrier.wavenumber();
  const ComplexVector a = steering_vector(geom, dir, k);
  const cd array_factor = a.dot(currents);  // a^H i
  const double f = element_pattern(geom.element.length, k, dir.theta);
  const cd prefactor = cd(0.0, kZ0) * std::polar(1.0, -k * r) / (2.0 * kPi * r);
  return prefactor * f * array_factor;
}

double radiation_intensity(const ArrayGeometry& geom, const Direction& dir,
                           const CarrierSpec& carrier, const ComplexVector& currents) {
  const double k = carrier.wavenumber();
  const double f = element_pattern(geom.element.length, k, dir.theta);
  const ComplexVector a = steering_vector(geom, dir, k);
  return kZ0 / (8.0 * kPi * kPi) * f * f * std::norm(a.dot(currents));
}

std::optional<std::string> far_field_warning(const ArrayGeometry& geom, const CarrierSpec& carrier,
                                             double r) {
  double extent = geom.element.length;
  for (std::size_t n = 0; n < geom.size(); ++n) {
    for (std::size_t m = n + 1; m < geom.size(); ++m) {
      extent = std::max(extent, (geom.positions[n] - geom.positions[m]).norm());
    }
  }
  const double fraunhofer = 2.0 * extent * extent / carrier.wavelength();
  const double needed = 10.0 * std::max(extent, fraunhofer);
  if (r >= needed) return std::nullopt;
  std::ostringstream os;
  os << "receiver distance " << r << " m is not well inside the far field (aperture " << extent
     << " m, Fraunhofer distance " << fraunhofer << " m)";
  return os.str();
}

}  // namespace sdarray
