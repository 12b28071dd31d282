#pragma once

#include "huberfdr/numeric_policy.hpp"

namespace huberfdr {

// Asymmetric Huber distribution H(mu0, sigma0, ka, kb): a N(mu0, sigma0^2)
// core on the standardized interval [-ka, kb] with exponential tails
// outside.  The null proportion p0 is the weight the normalization puts on
// the Gaussian core.
struct HuberParams {
  double mu0 = 0.0;
  double sigma0 = 1.0;
  double ka = 1.5;  // left knot, standardized units
  double kb = 1.5;  // right knot, standardized units
};

struct StandardizedZ {
  double u = 0.0;
};

inline StandardizedZ standardize(double z, const HuberParams& p) {
  return {(z - p.mu0) / p.sigma0};
}

inline double unstandardize(StandardizedZ s, const HuberParams& p) {
  return p.mu0 + p.sigma0 * s.u;
}

// Throws std::invalid_argument when sigma0 <= 0 or a knot falls outside
// (0, k_max].
void validate(const HuberParams& p, const NumericPolicy& policy = {});

// A knot at the k_max cap means that tail carries no mass worth modeling.
inline bool left_tail_vanished(const HuberParams& p,
                               const NumericPolicy& policy = {}) {
  return p.ka >= policy.k_max - policy.boundary_tol;
}

inline bool right_tail_vanished(const HuberParams& p,
                                const NumericPolicy& policy = {}) {
  return p.kb >= policy.k_max - policy.boundary_tol;
}

// p0 = sqrt(2 pi) / [exp(-ka^2/2)/ka + exp(-kb^2/2)/kb
//                    + sqrt(2 pi) (Phi(ka) + Phi(kb) - 1)].
// Throws std::domain_error unless both knots are positive.
double null_proportion(double ka, double kb);

// 1 - p0 evaluated without the cancellation that the direct subtraction
// suffers when both tails are thin (p0 near 1).
double null_proportion_complement(double ka, double kb);

}  // namespace huberfdr
