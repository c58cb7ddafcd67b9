#include "sdarray/mom.hpp"

#include <map>
#include <sstream>

namespace sdarray {

void MomDiscretization::validate(const ArrayGeometry& geom, const CarrierSpec& carrier) const {
  if (half_samples < 10) throw DomainError("MoM needs at least 10 half-samples (2M+1 >= 21)");
  if (!(spacing(geom.element.length) < 0.1 * carrier.wavelength())) {
    throw DomainError("MoM sample spacing must be below lambda/10");
  }
}

MomDiscretization MomDiscretization::from_samples(int total_samples) {
  if (total_samples < 21 || total_samples % 2 == 0) {
    throw DomainError("MoM sample count must be odd and at least 21");
  }
  MomDiscretization d;
  d.half_samples = (total_samples - 1) / 2;
  return d;
}

namespace {

const GaussLegendre& pulse_rule() {
  static const GaussLegendre rule(8);
  return rule;
}

// Nodes and weights for the circumferential mean over phi in [0, pi]; panels
// are graded towards phi = 0 where the source-to-observer distance vanishes.
struct AngularRule {
  std::vector<double> half_chord;  // sin(phi/2)
  std::vector<double> weight;      // sums to 1
};

const AngularRule& angular_rule() {
  static const AngularRule rule = [] {
    AngularRule r;
    const double edges[] = {0.0, kPi / 32.0, kPi / 8.0, kPi / 2.0, kPi};
    const GaussLegendre gl(16);
    for (int p = 0; p < 4; ++p) {
      const double half = 0.5 * (edges[p + 1] - edges[p]);
      const double mid = edges[p] + half;
      for (std::size_t i = 0; i < gl.size(); ++i) {
        const double phi = mid + half * gl.nodes()[i];
        r.half_chord.push_back(std::sin(0.5 * phi));
        r.weight.push_back(half * gl.weights()[i] / kPi);
      }
    }
    return r;
  }();
  return rule;
}

// int_lo^hi (exp(-jkR) - 1)/R du, smooth and bounded.
cd dynamic_part(double lo, double hi, double distance, double k) {
  const auto& gl = pulse_rule();
  const double half = 0.5 * (hi - lo);
  const double mid = lo + half;
  cd sum = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double u = mid + half * gl.nodes()[i];
    const double r = std::hypot(u, distance);
    const double s = std::sin(0.5 * k * r);
    sum += gl.weights()[i] * cd(-2.0 * s * s, -std::sin(k * r)) / r;
  }
  return half * sum;
}

// ln(|u| + sqrt(u^2 + b^2))
double log_term(double u, double b) { return std::log(std::abs(u) + std::hypot(u, b)); }

}  // namespace

cd pulse_integral_reduced(double lo, double hi, double distance, double wavenumber) {
  if (!(distance > 0.0)) throw DomainError("pulse_integral_reduced: distance must be positive");
  const double stat = std::asinh(hi / distance) - std::asinh(lo / distance);
  return (stat + dynamic_part(lo, hi, distance, wavenumber)) / (4.0 * kPi);
}

cd pulse_integral_exact(double lo, double hi, double radius, double wavenumber) {
  if (!(radius > 0.0)) throw DomainError("pulse_integral_exact: radius must be positive");
  if (hi <= 0.0) return pulse_integral_exact(-hi, -lo, radius, wavenumber);
  const auto& ang = angular_rule();
  const bool straddles = lo < 0.0;
  double stat = 0.0;
  cd dyn = 0.0;
  for (std::size_t i = 0; i < ang.weight.size(); ++i) {
    const double b = 2.0 * radius * ang.half_chord[i];
    // asinh(u/b) = sign(u) (ln(|u| + sqrt(u^2+b^2)) - ln b); the mean of ln b
    // over the circumference is exactly ln(radius).
    const double s = straddles ? log_term(hi, b) + log_term(lo, b) : log_term(hi, b) - log_term(lo, b);
    stat += ang.weight[i] * s;
    dyn += ang.weight[i] * dynamic_part(lo, hi, b, wavenumber);
  }
  if (straddles) stat -= 2.0 * std::log(radius);
  return (stat + dyn) / (4.0 * kPi);
}

namespace {

void validate_mom_geometry(const ArrayGeometry& geom) {
  geom.validate();
  for (std::size_t n = 1; n < geom.size(); ++n) {
    if (std::abs(geom.positions[n].z() - geom.positions[0].z()) > 1e-12 * geom.element.length) {
      throw GeometryError("MoM solver supports side-by-side dipoles only (equal z)");
    }
  }
}

double lateral_distance(const ArrayGeometry& geom, std::size_t p, std::size_t q) {
  const Eigen::Vector3d d = geom.positions[p] - geom.positions[q];
  return std::hypot(d.x(), d.y());
}

cd pulse_integral(double lo, double hi, double distance, bool self, const MomDiscretization& disc,
                  double radius, double k) {
  if (self) {
    return disc.self_kernel == WireKernel::exact ? pulse_integral_exact(lo, hi, radius, k)
                                                 : pulse_integral_reduced(lo, hi, radius, k);
  }
  return pulse_integral_reduced(lo, hi, distance, k);
}

}  // namespace

ComplexMatrix kernel_matrix(const ArrayGeometry& geom, const CarrierSpec& carrier,
                            const MomDiscretization& disc) {
  validate_mom_geometry(geom);
  disc.validate(geom, carrier);
  const int m_half = disc.half_samples;
  const int per = disc.samples();
  const double delta = disc.spacing(geom.element.length);
  const double k = carrier.wavenumber();
  const auto n = static_cast<Eigen::Index>(geom.size()) * per;
  ComplexMatrix a(n, n);
  for (std::size_t p = 0; p < geom.size(); ++p) {
    for (std::size_t q = 0; q < geom.size(); ++q) {
      const double d = lateral_distance(geom, p, q);
      for (int i = -m_half; i <= m_half; ++i) {
        for (int j = -m_half; j <= m_half; ++j) {
          const double zi = i * delta;
          const double zj = j * delta;
          // u = z_i - z' for z' across pulse j
          const cd v = pulse_integral(zi - zj - 0.5 * delta, zi - zj + 0.5 * delta, d, p == q, disc,
                                      geom.element.radius, k);
          a(static_cast<Eigen::Index>(p) * per + (i + m_half),
            static_cast<Eigen::Index>(q) * per + (j + m_half)) = v;
        }
      }
    }
  }
  return a;
}

SampledCurrents hallen_solve(const ArrayGeometry& geom, const CarrierSpec& carrier,
                             const ComplexVector& v_in, const MomDiscretization& disc) {
  validate_mom_geometry(geom);
  disc.validate(geom, carrier);
  const std::size_t dipoles = geom.size();
  if (static_cast<std::size_t>(v_in.size()) != dipoles) {
    throw DomainError("hallen_solve: one input voltage per dipole required");
  }
  const int m_half = disc.half_samples;
  const double delta = disc.spacing(geom.element.length);
  const double k = carrier.wavenumber();

  // Every interaction depends only on the sample offset, so each distinct
  // lateral distance needs one table of pulse integrals over offsets 0..2M.
  std::map<std::pair<bool, double>, std::vector<cd>> tables;
  auto table_for = [&](std::size_t p, std::size_t q) -> const std::vector<cd>& {
    const bool self = p == q;
    const double d = self ? geom.element.radius : lateral_distance(geom, p, q);
    auto [it, inserted] = tables.try_emplace({self, d});
    if (inserted) {
      it->second.resize(static_cast<std::size_t>(2 * m_half + 1));
      for (int s = 0; s <= 2 * m_half; ++s) {
        it->second[static_cast<std::size_t>(s)] =
            pulse_integral((s - 0.5) * delta, (s + 0.5) * delta, d, self, disc,
                           geom.element.radius, k);
      }
    }
    return it->second;
  };

  // Currents are even in z, so fold onto m = 0..M: unknowns I(0..M-1) and the
  // homogeneous constant per dipole; I(M) = 0 and matching at z = 0..M*delta.
  const Eigen::Index block = m_half + 1;
  const Eigen::Index size = static_cast<Eigen::Index>(dipoles) * block;
  ComplexMatrix a = ComplexMatrix::Zero(size, size);
  ComplexVector rhs(size);
  for (std::size_t p = 0; p < dipoles; ++p) {
    const Eigen::Index row0 = static_cast<Eigen::Index>(p) * block;
    for (std::size_t q = 0; q < dipoles; ++q) {
      const auto& t = table_for(p, q);
      const Eigen::Index col0 = static_cast<Eigen::Index>(q) * block;
      for (int i = 0; i <= m_half; ++i) {
        for (int j = 0; j < m_half; ++j) {
          cd v = t[static_cast<std::size_t>(std::abs(i - j))];
          if (j > 0) v += t[static_cast<std::size_t>(i + j)];
          a(row0 + i, col0 + j) = v;
        }
      }
    }
    for (int i = 0; i <= m_half; ++i) {
      const double z = i * delta;
      a(row0 + i, row0 + m_half) = -std::cos(k * z);
      rhs[row0 + i] = cd(0.0, -1.0) * v_in[static_cast<Eigen::Index>(p)] / (2.0 * kZ0) * std::sin(k * z);
    }
  }

  SampledCurrents out;
  out.half_samples = m_half;
  out.spacing = delta;
  out.values = ComplexMatrix::Zero(static_cast<Eigen::Index>(dipoles), disc.samples());
  if (v_in.squaredNorm() == 0.0) return out;

  ComplexVector x;
  try {
    x = solve_linear(a, rhs);
  } catch (const ConditioningError& e) {
    std::ostringstream os;
    os << "Hallen system is ill-conditioned at 2M+1 = " << disc.samples()
       << "; try a different sample count (e.g. " << disc.samples() + 40 << "). " << e.what();
    throw ConditioningError(os.str(), e.rcond());
  }
  const double residual = (a * x - rhs).norm() / rhs.norm();
  if (!(residual <= 1e-8)) {
    std::ostringstream os;
    os << "Hallen system residual " << residual << " exceeds 1e-8";
    throw NumericalError(os.str());
  }

  for (std::size_t p = 0; p < dipoles; ++p) {
    const Eigen::Index row0 = static_cast<Eigen::Index>(p) * block;
    for (int m = -m_half + 1; m < m_half; ++m) {
      out.values(static_cast<Eigen::Index>(p), m + m_half) = x[row0 + std::abs(m)];
    }
  }
  return out;
}

cd space_factor(const SampledCurrents& currents, std::size_t dipole, double theta,
                double wavenumber) {
  const double c = std::cos(theta);
  const double delta = currents.spacing;
  const double x = 0.5 * wavenumber * delta * c;
  // sin((k delta / 2) cos t) / ((k / 2) cos t), equal to delta at cos t = 0
  const double weight = std::abs(x) < 1e-8 ? delta * (1.0 - x * x / 6.0) : delta * std::sin(x) / x;
  cd sum = 0.0;
  for (int m = -currents.half_samples; m <= currents.half_samples; ++m) {
    sum += currents.at(dipole, m) * std::polar(1.0, wavenumber * m * delta * c);
  }
  return sum * weight;
}

double mom_radiation_intensity(const ArrayGeometry& geom, const Direction& dir,
                               const CarrierSpec& carrier, const ComplexVector& space_factors) {
  if (static_cast<std::size_t>(space_factors.size()) != geom.size()) {
    throw DomainError("mom_radiation_intensity: one space factor per dipole required");
  }
  const double k = carrier.wavenumber();
  const Eigen::Vector3d rhat = dir.unit_vector();
  cd field = 0.0;
  for (std::size_t n = 0; n < geom.size(); ++n) {
    field += std::polar(1.0, k * rhat.dot(geom.positions[n])) * space_factors[static_cast<Eigen::Index>(n)];
  }
  const double st = std::sin(dir.theta);
  return kZ0 * k * k * st * st / (32.0 * kPi * kPi) * std::norm(field);
}

MomPowers mom_powers(const ComplexVector& v_in, const SampledCurrents& currents,
                     double loss_per_length) {
  const ComplexVector i_in = currents.feed_currents();
  if (i_in.size() != v_in.size()) throw DomainError("mom_powers: size mismatch");
  const double driven = v_in.dot(i_in).real();
  if (driven < -1e-9) {
    std::ostringstream os;
    os << "MoM solution is not passive: Re{v^H i} = " << driven;
    throw PassivityError(os.str());
  }
  MomPowers p;
  p.radiated = std::max(0.0, 0.5 * driven);
  p.loss = 0.5 * loss_per_length * currents.values.squaredNorm() * currents.spacing;
  return p;
}

double mom_gain(const MomSolution& solution, const ArrayGeometry& geom, const CarrierSpec& carrier,
                const Direction& dir) {
  const double k = carrier.wavenumber();
  ComplexVector sf(static_cast<Eigen::Index>(geom.size()));
  for (std::size_t n = 0; n < geom.size(); ++n) {
    sf[static_cast<Eigen::Index>(n)] = space_factor(solution.currents, n, dir.theta, k);
  }
  const double input = solution.powers.input();
  if (!(input > 0.0)) throw DomainError("mom_gain: solution carries no power");
  return 4.0 * kPi * mom_radiation_intensity(geom, dir, carrier, sf) / input;
}

MomSolution mom_gain_pipeline(const ImpedanceSet& set, const Direction& dir, double power_budget,
                              const MomDiscretization& disc, const MatchSpec& match) {
  MomSolution s;
  s.excitation = optimal_currents(set, match, dir, power_budget);
  s.v_in = set.z_emf * s.excitation;
  s.currents = hallen_solve(set.geometry, set.carrier, s.v_in, disc);
  s.i_in = s.currents.feed_currents();
  const DipoleSpec& el = set.geometry.element;
  s.powers = mom_powers(s.v_in, s.currents,
                        loss_resistance_per_length(el.radius, set.carrier.frequency(), el.conductivity));
  s.gain = mom_gain(s, set.geometry, set.carrier, dir);
  return s;
}

MomSolution mom_gain_pipeline(const ArrayGeometry& geom, const CarrierSpec& carrier,
                              const Direction& dir, double power_budget,
                              const MomDiscretization& disc) {
  return mom_gain_pipeline(input_impedance_matrix(geom, carrier), dir, power_budget, disc);
}

}  // namespace sdarray
