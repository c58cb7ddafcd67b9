#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "sdarray/errors.hpp"

namespace sdarray {

using cd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Gauss-Legendre nodes and weights on [-1, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(std::size_t node_count);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Composite Gauss-Legendre rule: `panels` equal sub-intervals, each with the
/// same node count. Exact for polynomials of degree 2*node_count-1.
struct Quadrature1D {
  explicit Quadrature1D(std::size_t node_count = 64, std::size_t panels = 1)
      : rule(node_count), panels(panels) {
    if (panels == 0) throw DomainError("Quadrature1D: panel count must be positive");
  }

  GaussLegendre rule;
  std::size_t panels;

  /// Abscissae and weights mapped onto [a, b].
  void map(double a, double b, std::vector<double>& x, std::vector<double>& w) const;
};

[[noreturn]] void throw_non_finite_sample(double abscissa);

/// Integrates a real- or complex-valued f over [a, b]. Throws DomainError if
/// a >= b or if f returns a non-finite value (the message names the abscissa).
template <typename F>
cd integrate_1d(F&& f, double a, double b, const Quadrature1D& q) {
  if (!(a < b)) throw DomainError("integrate_1d: require a < b");
  const auto& xs = q.rule.nodes();
  const auto& ws = q.rule.weights();
  const double width = (b - a) / static_cast<double>(q.panels);
  cd sum = 0.0;
  for (std::size_t p = 0; p < q.panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double half = 0.5 * width;
    const double mid = lo + half;
    cd panel = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = mid + half * xs[i];
      const cd v = static_cast<cd>(f(x));
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw_non_finite_sample(x);
      panel += ws[i] * v;
    }
    sum += half * panel;
  }
  return sum;
}

/// Si(x) = int_0^x sin(t)/t dt.
double sin_integral(double x);

/// Ci(x) = -int_x^inf cos(t)/t dt, x > 0.
double cos_integral(double x);

/// E1(jx) = -Ci(x) + j(Si(x) - pi/2) for x > 0.
cd exp_integral_e1_imag(double x);

/// Dense LU solve with partial pivoting. Throws ConditioningError when the
/// reciprocal condition estimate falls below `min_rcond`.
ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b,
                           double min_rcond = 1e-13);

/// Real matrix, complex right-hand side.
ComplexVector solve_linear(const Eigen::MatrixXd& a, const ComplexVector& b,
                           double min_rcond = 1e-13);

bool is_hermitian(const ComplexMatrix& m, double rel_tol = 1e-12);

}  // namespace sdarray
