#include "sdarray/design.hpp"

#include <limits>
#include <sstream>

namespace sdarray {

namespace {

constexpr double kZeroCurrentFraction = 1e-12;

double pattern_factor(const ImpedanceSet& set, const Direction& dir) {
  const double f = element_pattern(set.geometry.element.length, set.carrier.wavenumber(), dir.theta);
  return kZ0 * f * f / kPi;
}

}  // namespace

void MatchSpec::validate(std::size_t ports) const {
  if (mode != MatchMode::custom) return;
  if (static_cast<std::size_t>(z_match.size()) != ports) {
    throw DomainError("custom matching impedances must have one entry per port");
  }
  for (Eigen::Index n = 0; n < z_match.size(); ++n) {
    if (z_match[n].real() < 0.0) {
      std::ostringstream os;
      os << "matching impedance of port " << n << " has negative resistance";
      throw DomainError(os.str());
    }
  }
}

void LinkSpec::validate() const {
  if (!(bandwidth > 0.0) || !(noise_density > 0.0) || !(power_budget > 0.0) || !(range > 0.0)) {
    throw DomainError("link bandwidth, noise density, power budget and range must be positive");
  }
  direction.validate();
}

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }
double to_db(double linear) { return 10.0 * std::log10(linear); }

ComplexVector optimal_currents(const ImpedanceSet& set, const MatchSpec& match,
                               const Direction& dir, double power_budget) {
  if (!(power_budget > 0.0)) throw DomainError("power budget must be positive");
  match.validate(set.size());
  const ComplexVector a = steering_vector(set.geometry, dir, set.carrier.wavenumber());
  const Eigen::MatrixXd re_in = set.re_z_in();

  if (match.mode == MatchMode::active_conjugate) {
    // Reflectionless matching doubles P_in into P_total, so maximising eta*G
    // is maximising G: i ~ Re{Z_in}^-1 a, scaled so i^H Re{Z_in} i = P_t.
    const ComplexVector x = solve_linear(re_in, a);
    const double q = a.dot(x).real();
    if (!(q > 0.0)) throw ConditioningError("Re{Z_in} is not positive definite", 0.0);
    return std::sqrt(power_budget / q) * x;
  }

  Eigen::MatrixXd c = re_in;
  if (match.mode == MatchMode::input_conjugate) {
    c.diagonal() += re_in.diagonal();
  } else {
    c.diagonal() += match.z_match.real();
  }
  const ComplexVector x = solve_linear(c, a);
  const double q = a.dot(x).real();
  if (!(q > 0.0)) throw ConditioningError("Re{Z_M} + Re{Z_in} is not positive definite", 0.0);
  return std::sqrt(2.0 * power_budget / q) * x;
}

std::vector<std::optional<cd>> active_impedance_entries(const ImpedanceSet& set,
                                                        const ComplexVector& currents) {
  const auto n = static_cast<Eigen::Index>(set.size());
  if (currents.size() != n) throw DomainError("current vector size does not match the array");
  const double threshold = kZeroCurrentFraction * currents.norm();
  std::vector<std::optional<cd>> out(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) {
    if (!(std::abs(currents[p]) > threshold)) continue;
    cd zp = set.r_loss + set.z(p, p);
    for (Eigen::Index q = 0; q < n; ++q) {
      if (q != p) zp += set.z(p, q) * currents[q] / currents[p];
    }
    out[static_cast<std::size_t>(p)] = zp;
  }
  return out;
}

ComplexVector active_impedances(const ImpedanceSet& set, const ComplexVector& currents) {
  const auto entries = active_impedance_entries(set, currents);
  ComplexVector z(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t p = 0; p < entries.size(); ++p) {
    if (!entries[p]) {
      std::ostringstream os;
      os << "active impedance of port " << p << " is undefined (zero current)";
      throw DomainError(os.str());
    }
    z[static_cast<Eigen::Index>(p)] = *entries[p];
  }
  return z;
}

cd reflection_coefficient(cd z_active, cd z_match) {
  const cd den = z_active + z_match;
  if (std::abs(den) <= std::numeric_limits<double>::min()) {
    throw DomainError("reflection_coefficient: Z_a = -Z_M (degenerate port)");
  }
  return (z_active - std::conj(z_match)) / den;
}

ComplexVector matching_impedances(const ImpedanceSet& set, const MatchSpec& match,
                                  const ComplexVector& currents) {
  match.validate(set.size());
  const ComplexMatrix z_in = set.z_in();
  switch (match.mode) {
    case MatchMode::custom:
      return match.z_match;
    case MatchMode::input_conjugate:
      return z_in.diagonal().conjugate();
    case MatchMode::active_conjugate: {
      const auto entries = active_impedance_entries(set, currents);
      ComplexVector zm = z_in.diagonal().conjugate();
      for (std::size_t p = 0; p < entries.size(); ++p) {
        if (entries[p]) zm[static_cast<Eigen::Index>(p)] = std::conj(*entries[p]);
      }
      return zm;
    }
  }
  throw DomainError("unknown matching mode");
}

PowerBreakdown power_breakdown(const ImpedanceSet& set, const ComplexVector& z_match,
                               const ComplexVector& currents) {
  const auto n = static_cast<Eigen::Index>(set.size());
  if (currents.size() != n || z_match.size() != n) {
    throw DomainError("power_breakdown: size mismatch");
  }
  PowerBreakdown p;
  p.radiated = 0.5 * currents.dot(set.z_real.cast<cd>() * currents).real();
  p.loss = 0.5 * set.r_loss * currents.squaredNorm();
  p.input = p.radiated + p.loss;
  double matched = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) matched += z_match[k].real() * std::norm(currents[k]);
  p.total = 0.5 * matched + p.input;
  return p;
}

double array_gain(const ImpedanceSet& set, const Direction& dir, const ComplexVector& currents) {
  const ComplexVector a = steering_vector(set.geometry, dir, set.carrier.wavenumber());
  const double denom = currents.dot(set.re_z_in().cast<cd>() * currents).real();
  if (!(denom > 0.0)) throw DomainError("array_gain: current vector must be nonzero");
  return pattern_factor(set, dir) * std::norm(a.dot(currents)) / denom;
}

double g_max(const ImpedanceSet& set, const Direction& dir) {
  const ComplexVector a = steering_vector(set.geometry, dir, set.carrier.wavenumber());
  const ComplexVector x = solve_linear(set.re_z_in(), a);
  return pattern_factor(set, dir) * a.dot(x).real();
}

ExcitationSolution solve_excitation(const ImpedanceSet& set, const MatchSpec& match,
                                    const Direction& dir, double power_budget) {
  ExcitationSolution s;
  s.currents = optimal_currents(set, match, dir, power_budget);
  s.z_match = matching_impedances(set, match, s.currents);
  // Fallback ports (zero current) keep input-conjugate matching, which can move
  // P_total off the budget; rescaling leaves Z_a and therefore Z_M unchanged.
  const PowerBreakdown trial = power_breakdown(set, s.z_match, s.currents);
  s.currents *= std::sqrt(power_budget / trial.total);

  s.voltages = set.z_in() * s.currents;
  s.z_active = active_impedance_entries(set, s.currents);
  s.reflection.resize(s.currents.size());
  for (Eigen::Index p = 0; p < s.currents.size(); ++p) {
    const auto& za = s.z_active[static_cast<std::size_t>(p)];
    s.reflection[p] = za ? reflection_coefficient(*za, s.z_match[p])
                         : cd(std::numeric_limits<double>::quiet_NaN(), 0.0);
  }
  s.powers = power_breakdown(set, s.z_match, s.currents);
  s.efficiency = s.powers.matching_efficiency();
  s.gain = array_gain(set, dir, s.currents);
  return s;
}

LinkResult received_power_and_rate(const LinkSpec& link, double wavelength, double efficiency,
                                   double gain) {
  link.validate();
  const double spreading = wavelength / (4.0 * kPi * link.range);
  LinkResult r;
  r.received_power = efficiency * link.power_budget * spreading * spreading * gain;
  r.rate = link.bandwidth * std::log2(1.0 + r.received_power / (link.bandwidth * link.noise_density));
  return r;
}

}  // namespace sdarray
