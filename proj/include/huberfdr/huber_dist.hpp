#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "huberfdr/huber_params.hpp"
#include "huberfdr/zdata.hpp"

namespace huberfdr {

// rho(u): the negative log of the unnormalized standardized density.
// Quadratic on [-ka, kb], linear outside; value and first derivative are
// continuous at the knots.
inline double huber_rho(double u, double ka, double kb) {
  if (u < -ka) return -ka * u - 0.5 * ka * ka;
  if (u > kb) return kb * u - 0.5 * kb * kb;
  return 0.5 * u * u;
}

// log f^H(z) = log p0 - log sigma0 - log(2 pi)/2 - rho((z - mu0)/sigma0).
double log_density(double z, const HuberParams& p);
double density(double z, const HuberParams& p);

// Local false discovery rate fdr^H(z): 1 on the central region,
// exp(-(u+ka)^2/2) below it, exp(-(u-kb)^2/2) above it.  A knot at the
// k_max cap means that tail vanished and the fdr stays 1 on that side.
double log_fdr(double z, const HuberParams& p, const NumericPolicy& policy = {});
double fdr_local(double z, const HuberParams& p, const NumericPolicy& policy = {});

// Piecewise closed-form distribution function; tail pieces are assembled
// in log space so they underflow gracefully instead of losing digits.
double cdf(double z, const HuberParams& p);

// Inverse of cdf.  Throws std::domain_error for q outside (0, 1).
double quantile(double q, const HuberParams& p);

// Implied alternative density f1 = [p0/(1-p0)] [(1-fdr)/fdr] f0.  Zero on
// the central region.  Throws std::domain_error when both knots sit at the
// k_max boundary (p0 = 1: no alternative component).
double alt_density(double z, const HuberParams& p, const NumericPolicy& policy = {});

// n i.i.d. draws by inverse-CDF over a seeded uniform stream.
ZData sample(Eigen::Index n, const HuberParams& p, std::uint64_t seed);

// Array forms used by fitting hot paths and report grids.
Eigen::ArrayXd log_density(const Eigen::ArrayXd& z, const HuberParams& p);
Eigen::ArrayXd fdr_local(const Eigen::ArrayXd& z, const HuberParams& p,
                         const NumericPolicy& policy = {});

}  // namespace huberfdr
