#pragma once

// Shared test oracles: adaptive quadrature, Kolmogorov-Smirnov statistics
// and a from-the-formulas unnormalized Huber density that stays
// independent of the library implementation it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace testsupport {

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0,
                              depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0,
                              depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-11) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson(f, a, b, fa, fm, fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Integrate with interior breakpoints (piecewise-smooth integrands).
inline double integrate_pieces(const std::function<double(double)>& f,
                               std::vector<double> knots,
                               double tol = 1e-11) {
  std::sort(knots.begin(), knots.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i + 1] > knots[i]) {
      total += integrate(f, knots[i], knots[i + 1], tol);
    }
  }
  return total;
}

// Standard normal cdf, independent of the library's version.
inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// exp(-rho(u)) written straight from the piecewise definition.
inline double unnormalized_huber(double u, double ka, double kb) {
  if (u < -ka) return std::exp(ka * u + 0.5 * ka * ka);
  if (u > kb) return std::exp(-kb * u + 0.5 * kb * kb);
  return std::exp(-0.5 * u * u);
}

// One-sample KS statistic of data against a cdf.
inline double ks_statistic(std::vector<double> data,
                           const std::function<double(double)>& cdf) {
  if (data.empty()) throw std::invalid_argument("ks_statistic: empty data");
  std::sort(data.begin(), data.end());
  const double n = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double c = cdf(data[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(c - static_cast<double>(i + 1) / n));
  }
  return d;
}

// Asymptotic KS critical value at significance alpha.
inline double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) /
         std::sqrt(static_cast<double>(n));
}

}  // namespace testsupport
