#include "sdarray/coupling.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace sdarray {

ComplexMatrix ImpedanceSet::z_in() const {
  ComplexMatrix m = z;
  m.diagonal().array() += r_loss;
  return m;
}

Eigen::MatrixXd ImpedanceSet::re_z_in() const {
  Eigen::MatrixXd m = z_real;
  m.diagonal().array() += r_loss;
  return m;
}

namespace {

struct SphereRule {
  std::vector<double> theta, theta_w, pattern;  // pattern = F^2 sin(theta)
  std::vector<double> cos_phi, sin_phi, phi_w;
};

SphereRule make_sphere_rule(const FarFieldQuadrature& quad, std::size_t theta_panels,
                            std::size_t phi_panels, double length, double k) {
  SphereRule r;
  Quadrature1D(quad.theta_nodes, theta_panels).map(0.0, kPi, r.theta, r.theta_w);
  r.pattern.resize(r.theta.size());
  for (std::size_t i = 0; i < r.theta.size(); ++i) {
    const double f = element_pattern(length, k, r.theta[i]);
    r.pattern[i] = f * f * std::sin(r.theta[i]);
  }
  std::vector<double> phi;
  Quadrature1D(quad.phi_nodes, phi_panels).map(0.0, 2.0 * kPi, phi, r.phi_w);
  r.cos_phi.resize(phi.size());
  r.sin_phi.resize(phi.size());
  for (std::size_t j = 0; j < phi.size(); ++j) {
    r.cos_phi[j] = std::cos(phi[j]);
    r.sin_phi[j] = std::sin(phi[j]);
  }
  return r;
}

// (Z0 / 4 pi^2) * int int exp(-j k rhat . sep) F^2 sin(theta) dtheta dphi
cd sphere_integral(const SphereRule& r, const Eigen::Vector3d& sep, double k) {
  cd total = 0.0;
  for (std::size_t i = 0; i < r.theta.size(); ++i) {
    const double st = std::sin(r.theta[i]);
    const double axial = std::cos(r.theta[i]) * sep.z();
    cd inner = 0.0;
    for (std::size_t j = 0; j < r.cos_phi.size(); ++j) {
      const double arg = -k * (st * (r.cos_phi[j] * sep.x() + r.sin_phi[j] * sep.y()) + axial);
      inner += r.phi_w[j] * cd(std::cos(arg), std::sin(arg));
    }
    total += r.theta_w[i] * r.pattern[i] * inner;
  }
  return kZ0 / (4.0 * kPi * kPi) * total;
}

void check_index(const ArrayGeometry& geom, std::size_t n, std::size_t m) {
  if (n >= geom.size() || m >= geom.size()) throw DomainError("dipole index out of range");
}

}  // namespace

double z_real_entry(const ArrayGeometry& geom, const CarrierSpec& carrier, std::size_t n,
                    std::size_t m, const FarFieldQuadrature& quad) {
  check_index(geom, n, m);
  const double k = carrier.wavenumber();
  const double len = geom.element.length;
  const Eigen::Vector3d sep = geom.positions[n] - geom.positions[m];
  const double kd = k * sep.norm();

  std::size_t theta_panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(kd * kPi / 80.0)));
  std::size_t phi_panels = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(kd * kPi / 40.0)));

  // The self term sets the scale against which convergence is judged.
  const SphereRule base = make_sphere_rule(quad, theta_panels, phi_panels, len, k);
  const double scale = std::abs(sphere_integral(base, Eigen::Vector3d::Zero(), k));

  cd previous = sphere_integral(base, sep, k);
  cd current = previous;
  double change = 0.0;
  bool converged = false;
  for (int level = 0; level < quad.max_doublings; ++level) {
    theta_panels *= 2;
    phi_panels *= 2;
    current = sphere_integral(make_sphere_rule(quad, theta_panels, phi_panels, len, k), sep, k);
    change = std::abs(current - previous);
    if (change <= quad.target_rel_tol * std::max(scale, std::abs(current))) {
      converged = true;
      break;
    }
    previous = current;
  }
  if (!converged && change > quad.fail_rel_tol * std::max(scale, std::abs(current))) {
    std::ostringstream os;
    os << "z_real_entry(" << n << ", " << m << "): far-field quadrature did not converge "
       << "(node-doubling change " << change / std::max(scale, std::abs(current)) << " relative)";
    throw ResolutionError(os.str());
  }
  if (std::abs(current.imag()) > 1e-9 * std::max(std::abs(current.real()), scale)) {
    std::ostringstream os;
    os << "z_real_entry(" << n << ", " << m << "): imaginary residue " << current.imag()
       << " ohm is not negligible";
    throw ResolutionError(os.str());
  }
  return current.real();
}

Eigen::MatrixXd z_real_matrix(const ArrayGeometry& geom, const CarrierSpec& carrier,
                              const FarFieldQuadrature& quad) {
  const auto n = static_cast<Eigen::Index>(geom.size());
  Eigen::MatrixXd z(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = r; c < n; ++c) {
      z(r, c) = z_real_entry(geom, carrier, static_cast<std::size_t>(r),
                             static_cast<std::size_t>(c), quad);
      z(c, r) = z(r, c);
    }
  }
  return z;
}

namespace {

// int_{z1}^{z2} exp(-jkR)/R * exp(s j k z) dz with R = sqrt(d^2 + (z - a)^2).
// Closed form through E1 of imaginary argument: with w = R - s (z - a) the
// integrand is s e^{s j k a} d/dz E1(j k w).
cd shifted_kernel_integral(double a, int s, double z1, double z2, double d, double k) {
  auto w_of = [&](double z) {
    const double u = z - a;
    const double r = std::hypot(d, u);
    const double su = s * u;
    // R - s u, computed without cancellation when s u > 0.
    return su > 0.0 ? d * d / (r + su) : r - su;
  };
  const cd e2 = exp_integral_e1_imag(k * w_of(z2));
  const cd e1 = exp_integral_e1_imag(k * w_of(z1));
  return static_cast<double>(s) * std::polar(1.0, s * k * a) * (e2 - e1);
}

// int_{-h}^{h} sin(k(h - |z|)) exp(-jkR_a)/R_a dz.
cd sinusoid_kernel_integral(double a, double h, double d, double k) {
  const cd jj(0.0, 1.0);
  const cd ep = std::polar(1.0, k * h);
  const cd em = std::polar(1.0, -k * h);
  const cd upper = ep * shifted_kernel_integral(a, -1, 0.0, h, d, k) -
                   em * shifted_kernel_integral(a, +1, 0.0, h, d, k);
  const cd lower = ep * shifted_kernel_integral(a, +1, -h, 0.0, d, k) -
                   em * shifted_kernel_integral(a, -1, -h, 0.0, d, k);
  return (upper + lower) / (2.0 * jj);
}

}  // namespace

cd side_by_side_impedance(double length, double separation, double wavenumber) {
  if (!(separation > 0.0)) throw GeometryError("side_by_side_impedance: separation must be positive");
  const double k = wavenumber;
  const double h = 0.5 * length;
  const double s = std::sin(k * h);
  // Field of a sinusoidal current: exp(-jkR1)/R1 + exp(-jkR2)/R2 - 2 cos(kh) exp(-jkR0)/R0
  // with R1, R2 measured from the wire ends and R0 from the centre.
  const cd integral = sinusoid_kernel_integral(h, h, separation, k) +
                      sinusoid_kernel_integral(-h, h, separation, k) -
                      2.0 * std::cos(k * h) * sinusoid_kernel_integral(0.0, h, separation, k);
  return cd(0.0, kZ0 / (4.0 * kPi * s * s)) * integral;
}

cd mutual_impedance_emf(const ArrayGeometry& geom, const CarrierSpec& carrier, std::size_t n,
                        std::size_t m) {
  check_index(geom, n, m);
  const Eigen::Vector3d sep = geom.positions[n] - geom.positions[m];
  const double k = carrier.wavenumber();
  element_pattern(geom.element.length, k, 0.5 * kPi);  // model-validity guard
  if (std::abs(sep.z()) > 1e-9 * carrier.wavelength()) {
    throw GeometryError("induced-EMF impedance supports side-by-side dipoles only (equal z)");
  }
  double lateral = std::hypot(sep.x(), sep.y());
  if (n == m) {
    lateral = geom.element.radius;
  } else if (!(lateral > 0.0)) {
    std::ostringstream os;
    os << "dipoles " << n << " and " << m << " are coincident";
    throw GeometryError(os.str());
  }
  return side_by_side_impedance(geom.element.length, lateral, k);
}

ImpedanceSet input_impedance_matrix(const ArrayGeometry& geom, const CarrierSpec& carrier,
                                    const FarFieldQuadrature& quad) {
  geom.validate();
  ImpedanceSet set{geom, carrier, 0.0, {}, {}, {}};
  const auto n = static_cast<Eigen::Index>(geom.size());
  set.r_loss = loss_resistance(geom.element, carrier);
  set.z_real = z_real_matrix(geom, carrier, quad);
  set.z_emf.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = r; c < n; ++c) {
      set.z_emf(r, c) = mutual_impedance_emf(geom, carrier, static_cast<std::size_t>(r),
                                             static_cast<std::size_t>(c));
      set.z_emf(c, r) = set.z_emf(r, c);
    }
  }
  set.z = set.z_real.cast<cd>() + cd(0.0, 1.0) * set.z_emf.imag().cast<cd>();
  set.z_real_source = ImpedanceSource::far_field_quadrature;
  set.z_source = ImpedanceSource::hybrid;

  double worst = 0.0;
  Eigen::Index wr = 0;
  Eigen::Index wc = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = r; c < n; ++c) {
      const double floor = 1e-3 * std::sqrt(set.z_real(r, r) * set.z_real(c, c));
      const double rel = std::abs(set.z_emf(r, c).real() - set.z_real(r, c)) /
                         std::max(std::abs(set.z_real(r, c)), floor);
      if (rel > worst) {
        worst = rel;
        wr = r;
        wc = c;
      }
    }
  }
  if (worst > 5e-3) {
    std::ostringstream os;
    os << "induced-EMF resistance disagrees with far-field quadrature at (" << wr << ", " << wc
       << "): " << set.z_emf(wr, wc).real() << " vs " << set.z_real(wr, wc) << " ohm ("
       << worst * 100.0 << " %)";
    throw ConsistencyError(os.str());
  }
  return set;
}

ImpedanceSet uncoupled(const ImpedanceSet& coupled) {
  ImpedanceSet set = coupled;
  set.z_real = coupled.z_real.diagonal().asDiagonal();
  set.z = coupled.z.diagonal().asDiagonal();
  set.z_emf = coupled.z_emf.diagonal().asDiagonal();
  set.z_real_source = ImpedanceSource::uncoupled;
  set.z_source = ImpedanceSource::uncoupled;
  return set;
}

ImpedanceSet uncoupled(const ArrayGeometry& geom, const CarrierSpec& carrier,
                       const FarFieldQuadrature& quad) {
  geom.validate();
  const auto n = static_cast<Eigen::Index>(geom.size());
  // identical elements: one self term serves every port
  const double r_self = z_real_entry(geom, carrier, 0, 0, quad);
  const cd z_self = mutual_impedance_emf(geom, carrier, 0, 0);
  ImpedanceSet set{geom, carrier, loss_resistance(geom.element, carrier), {}, {}, {}};
  set.z_real = Eigen::MatrixXd::Identity(n, n) * r_self;
  set.z_emf = ComplexMatrix::Identity(n, n) * z_self;
  set.z = ComplexMatrix::Identity(n, n) * cd(r_self, z_self.imag());
  set.z_real_source = ImpedanceSource::uncoupled;
  set.z_source = ImpedanceSource::uncoupled;
  return set;
}

void write_matrix(std::ostream& os, const ComplexMatrix& m) {
  char buf[96];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g%+.17gj", m(r, c).real(), m(r, c).imag());
      if (c > 0) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

namespace {

cd parse_complex(const std::string& token) {
  if (token.size() < 2 || token.back() != 'j') {
    throw DomainError("read_matrix: malformed complex entry '" + token + "'");
  }
  const std::string body = token.substr(0, token.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) {
    throw DomainError("read_matrix: malformed complex entry '" + token + "'");
  }
  try {
    std::size_t used_re = 0;
    std::size_t used_im = 0;
    const double re = std::stod(body.substr(0, split), &used_re);
    const double im = std::stod(body.substr(split), &used_im);
    if (used_re != split || used_im != body.size() - split) throw std::invalid_argument("trailing");
    return {re, im};
  } catch (const std::logic_error&) {
    throw DomainError("read_matrix: malformed complex entry '" + token + "'");
  }
}

}  // namespace

ComplexMatrix read_matrix(std::istream& is) {
  std::vector<std::vector<cd>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<cd> row;
    std::string tok;
    while (ls >> tok) row.push_back(parse_complex(tok));
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DomainError("read_matrix: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  ComplexMatrix m(static_cast<Eigen::Index>(rows.size()),
                  rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

}  // namespace sdarray
