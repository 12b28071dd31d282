#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace huberfdr {

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty input");
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
  return 0.5 * (v[mid - 1] + hi);
}

inline double median(const Eigen::VectorXd& v) {
  return median(std::vector<double>(v.data(), v.data() + v.size()));
}

// Median absolute deviation (unscaled).
inline double mad(const Eigen::VectorXd& v) {
  const double m = median(v);
  std::vector<double> dev(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - m);
  return median(std::move(dev));
}

// Inverse-ECDF quantile: returns the ceil(q*n)-th order statistic, so
// interval endpoints are always actual draws.
inline double empirical_quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("empirical_quantile: empty input");
  if (!(q > 0.0 && q < 1.0)) {
    throw std::domain_error("empirical_quantile: q must lie in (0, 1)");
  }
  const std::size_t n = v.size();
  // smallest m with m/n >= q; the (1 - 1e-12) guard absorbs cases where
  // q*n lands an ulp above an integer (e.g. 0.025 * 2000)
  std::size_t idx = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n) * (1.0 - 1e-12)));
  idx = std::clamp<std::size_t>(idx, 1, n);
  std::nth_element(v.begin(), v.begin() + (idx - 1), v.end());
  return v[idx - 1];
}

// Linear-interpolation quantile on sorted data (used for the
// Freedman-Diaconis IQR, not for interval endpoints).
inline double interpolated_quantile_sorted(const std::vector<double>& sorted,
                                           double q) {
  if (sorted.empty()) {
    throw std::invalid_argument("interpolated_quantile: empty input");
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

}  // namespace huberfdr
