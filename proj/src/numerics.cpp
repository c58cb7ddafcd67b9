#include "sdarray/numerics.hpp"

#include <limits>
#include <sstream>

namespace sdarray {

GaussLegendre::GaussLegendre(std::size_t node_count) {
  if (node_count == 0) throw DomainError("GaussLegendre: node count must be positive");
  const std::size_t n = node_count;
  nodes_.resize(n);
  weights_.resize(n);
  if (n == 1) {
    nodes_[0] = 0.0;
    weights_[0] = 2.0;
    return;
  }
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes_[i] = -x;
    nodes_[n - 1 - i] = x;
    weights_[i] = w;
    weights_[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

void Quadrature1D::map(double a, double b, std::vector<double>& x, std::vector<double>& w) const {
  const auto& xs = rule.nodes();
  const auto& ws = rule.weights();
  x.clear();
  w.clear();
  x.reserve(xs.size() * panels);
  w.reserve(xs.size() * panels);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double half = 0.5 * width;
    const double mid = a + width * static_cast<double>(p) + half;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      x.push_back(mid + half * xs[i]);
      w.push_back(half * ws[i]);
    }
  }
}

void throw_non_finite_sample(double abscissa) {
  std::ostringstream os;
  os.precision(17);
  os << "integrate_1d: integrand is not finite at x = " << abscissa;
  throw DomainError(os.str());
}

namespace {

constexpr double kSeriesLimit = 4.0;

// Power series, accurate for |x| <= 4.
void sici_series(double x, double& si, double& ci) {
  const double x2 = x * x;
  double term = x;  // x^(2k+1)/(2k+1)! with alternating sign
  si = x;
  for (int k = 1; k < 60; ++k) {
    term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
    const double add = term / (2.0 * k + 1.0);
    si += add;
    if (std::abs(add) < 1e-18 * std::abs(si)) break;
  }
  double t = 1.0;  // x^(2k)/(2k)! with alternating sign
  double sum = 0.0;
  for (int k = 1; k < 60; ++k) {
    t *= -x2 / ((2.0 * k - 1.0) * (2.0 * k));
    const double add = t / (2.0 * k);
    sum += add;
    if (std::abs(add) < 1e-18 * (std::abs(sum) + 1e-300)) break;
  }
  ci = kEulerGamma + std::log(x) + sum;
}

// Continued fraction for E1(jx), evaluated with the modified Lentz method.
// Converges for x beyond a few units; used for x > 4.
cd e1_imag_cf(double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  cd b(1.0, x);
  cd c(1.0 / tiny, 0.0);
  cd d = 1.0 / b;
  cd h = d;
  for (int i = 2; i < 100000; ++i) {
    const double a = -static_cast<double>((i - 1) * (i - 1));
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const cd del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
  }
  return h * cd(std::cos(x), -std::sin(x));
}

}  // namespace

double sin_integral(double x) {
  if (x == 0.0) return 0.0;
  if (x < 0.0) return -sin_integral(-x);
  if (x <= kSeriesLimit) {
    double si = 0.0;
    double ci = 0.0;
    sici_series(x, si, ci);
    return si;
  }
  return kPi / 2.0 + e1_imag_cf(x).imag();
}

double cos_integral(double x) {
  if (!(x > 0.0)) throw DomainError("cos_integral: argument must be positive");
  if (x <= kSeriesLimit) {
    double si = 0.0;
    double ci = 0.0;
    sici_series(x, si, ci);
    return ci;
  }
  return -e1_imag_cf(x).real();
}

cd exp_integral_e1_imag(double x) {
  if (!(x > 0.0)) throw DomainError("exp_integral_e1_imag: argument must be positive");
  if (x <= kSeriesLimit) {
    double si = 0.0;
    double ci = 0.0;
    sici_series(x, si, ci);
    return {-ci, si - kPi / 2.0};
  }
  return e1_imag_cf(x);
}

ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b, double min_rcond) {
  if (a.rows() != a.cols()) throw DomainError("solve_linear: matrix must be square");
  if (a.rows() != b.size()) throw DomainError("solve_linear: dimension mismatch");
  if (a.rows() == 0) return ComplexVector(0);
  Eigen::PartialPivLU<ComplexMatrix> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond >= min_rcond)) {
    std::ostringstream os;
    os << "solve_linear: matrix is singular or ill-conditioned (rcond estimate " << rcond
       << ", condition ~" << (rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity())
       << ")";
    throw ConditioningError(os.str(), rcond);
  }
  return lu.solve(b);
}

ComplexVector solve_linear(const Eigen::MatrixXd& a, const ComplexVector& b, double min_rcond) {
  return solve_linear(ComplexMatrix(a.cast<cd>()), b, min_rcond);
}

bool is_hermitian(const ComplexMatrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - std::conj(m(j, i))) > rel_tol * scale) return false;
    }
  }
  return true;
}

}  // namespace sdarray
