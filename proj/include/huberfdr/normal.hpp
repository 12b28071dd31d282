#pragma once

#include <cmath>

namespace huberfdr {

inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kSqrt2Pi = 2.5066282746310005024;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

inline double norm_log_pdf(double x) { return -0.5 * (kLog2Pi + x * x); }

// Phi via the complementary error function; relative accuracy a few ulp
// in both tails (no underflow until |x| > 37.5).
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

inline double norm_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

// Inverse of Phi (Wichura's AS 241, PPND16).  Throws std::domain_error
// outside (0, 1).
double norm_quantile(double p);

// Upper tail of the chi-squared distribution with one degree of freedom.
inline double chi2_1_sf(double x) { return std::erfc(std::sqrt(0.5 * x)); }

}  // namespace huberfdr
