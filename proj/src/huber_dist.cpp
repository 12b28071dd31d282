#include "huberfdr/huber_dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "huberfdr/normal.hpp"
#include "huberfdr/rng.hpp"

namespace huberfdr {

void validate(const HuberParams& p, const NumericPolicy& policy) {
  if (!std::isfinite(p.mu0)) {
    throw std::invalid_argument("HuberParams: mu0 must be finite");
  }
  if (!(p.sigma0 > 0.0) || !std::isfinite(p.sigma0)) {
    throw std::invalid_argument("HuberParams: sigma0 must be positive");
  }
  if (!(p.ka > 0.0) || p.ka > policy.k_max) {
    throw std::invalid_argument("HuberParams: ka must lie in (0, k_max]");
  }
  if (!(p.kb > 0.0) || p.kb > policy.k_max) {
    throw std::invalid_argument("HuberParams: kb must lie in (0, k_max]");
  }
}

namespace {

// exp(-k^2/2)/k - sqrt(2 pi) Phi(-k): the excess tail mass of the
// exponential piece over the normal it replaces.  Positive for all k > 0
// (Mills inequality) and the exact numerator of 1 - p0.
double tail_excess(double k) {
  return std::exp(-0.5 * k * k) / k - kSqrt2Pi * norm_sf(k);
}

double unnormalized_total(double ka, double kb) {
  const double a = std::exp(-0.5 * ka * ka) / ka;
  const double b = std::exp(-0.5 * kb * kb) / kb;
  const double core = kSqrt2Pi * (norm_cdf(ka) + norm_cdf(kb) - 1.0);
  return a + b + core;
}

void require_positive_knots(double ka, double kb) {
  if (!(ka > 0.0) || !(kb > 0.0)) {
    throw std::domain_error("null_proportion: knots must be positive");
  }
}

}  // namespace

double null_proportion(double ka, double kb) {
  require_positive_knots(ka, kb);
  return kSqrt2Pi / unnormalized_total(ka, kb);
}

double null_proportion_complement(double ka, double kb) {
  require_positive_knots(ka, kb);
  return (tail_excess(ka) + tail_excess(kb)) / unnormalized_total(ka, kb);
}

double log_density(double z, const HuberParams& p) {
  const double u = (z - p.mu0) / p.sigma0;
  return std::log(null_proportion(p.ka, p.kb)) - std::log(p.sigma0) -
         0.5 * kLog2Pi - huber_rho(u, p.ka, p.kb);
}

double density(double z, const HuberParams& p) {
  return std::exp(log_density(z, p));
}

double log_fdr(double z, const HuberParams& p, const NumericPolicy& policy) {
  const double u = (z - p.mu0) / p.sigma0;
  if (u < -p.ka && !left_tail_vanished(p, policy)) {
    const double t = u + p.ka;
    return -0.5 * t * t;
  }
  if (u > p.kb && !right_tail_vanished(p, policy)) {
    const double t = u - p.kb;
    return -0.5 * t * t;
  }
  return 0.0;
}

double fdr_local(double z, const HuberParams& p, const NumericPolicy& policy) {
  return std::exp(log_fdr(z, p, policy));
}

double cdf(double z, const HuberParams& p) {
  const double u = (z - p.mu0) / p.sigma0;
  const double p0 = null_proportion(p.ka, p.kb);
  if (u <= -p.ka) {
    const double lg = std::log(p0) + norm_log_pdf(p.ka) - std::log(p.ka) +
                      (u + p.ka) * p.ka;
    return std::exp(lg);
  }
  if (u >= p.kb) {
    const double lg = std::log(p0) + norm_log_pdf(p.kb) - std::log(p.kb) -
                      (u - p.kb) * p.kb;
    return 1.0 - std::exp(lg);
  }
  const double left = p0 * norm_pdf(p.ka) / p.ka;
  return left + p0 * (norm_cdf(u) - norm_cdf(-p.ka));
}

double quantile(double q, const HuberParams& p) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::domain_error("quantile: q must lie in (0, 1)");
  }
  const double p0 = null_proportion(p.ka, p.kb);
  const double mass_left = p0 * norm_pdf(p.ka) / p.ka;   // below -ka
  const double mass_right = p0 * norm_pdf(p.kb) / p.kb;  // above kb
  double u;
  if (q <= mass_left) {
    u = -p.ka + std::log(q / mass_left) / p.ka;
  } else if (q >= 1.0 - mass_right) {
    u = p.kb - std::log((1.0 - q) / mass_right) / p.kb;
  } else {
    double inner = norm_cdf(-p.ka) + (q - mass_left) / p0;
    inner = std::clamp(inner, 5e-324, std::nextafter(1.0, 0.0));
    u = norm_quantile(inner);
  }
  return p.mu0 + p.sigma0 * u;
}

double alt_density(double z, const HuberParams& p, const NumericPolicy& policy) {
  if (left_tail_vanished(p, policy) && right_tail_vanished(p, policy)) {
    throw std::domain_error(
        "alt_density: both knots at the k_max boundary (p0 = 1), "
        "no alternative component");
  }
  const double lf = log_fdr(z, p, policy);
  if (lf == 0.0) return 0.0;  // central region
  const double u = (z - p.mu0) / p.sigma0;
  const double l0 = norm_log_pdf(u) - std::log(p.sigma0);
  const double odds = null_proportion(p.ka, p.kb) /
                      null_proportion_complement(p.ka, p.kb);
  return odds * std::exp(l0 - lf) * (-std::expm1(lf));
}

namespace {

// Shared pieces of the inverse CDF, hoisted out of the per-draw loop.
struct QuantileTable {
  double p0, mass_left, mass_right, cdf_at_left_knot;
  explicit QuantileTable(const HuberParams& p)
      : p0(null_proportion(p.ka, p.kb)),
        mass_left(p0 * norm_pdf(p.ka) / p.ka),
        mass_right(p0 * norm_pdf(p.kb) / p.kb),
        cdf_at_left_knot(norm_cdf(-p.ka)) {}
};

double inverse_cdf(double q, const HuberParams& p, const QuantileTable& t) {
  double u;
  if (q <= t.mass_left) {
    u = -p.ka + std::log(q / t.mass_left) / p.ka;
  } else if (q >= 1.0 - t.mass_right) {
    u = p.kb - std::log((1.0 - q) / t.mass_right) / p.kb;
  } else {
    double inner = t.cdf_at_left_knot + (q - t.mass_left) / t.p0;
    inner = std::clamp(inner, 5e-324, std::nextafter(1.0, 0.0));
    u = norm_quantile(inner);
  }
  return p.mu0 + p.sigma0 * u;
}

}  // namespace

ZData sample(Eigen::Index n, const HuberParams& p, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const QuantileTable table(p);
  UniformStream stream(seed);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = inverse_cdf(stream.next(), p, table);
  }
  return ZData(std::move(out), "simulated");
}

Eigen::ArrayXd log_density(const Eigen::ArrayXd& z, const HuberParams& p) {
  const double c = std::log(null_proportion(p.ka, p.kb)) -
                   std::log(p.sigma0) - 0.5 * kLog2Pi;
  const Eigen::ArrayXd u = (z - p.mu0) / p.sigma0;
  const Eigen::ArrayXd rho =
      (u < -p.ka)
          .select(-p.ka * u - 0.5 * p.ka * p.ka,
                  (u > p.kb).select(p.kb * u - 0.5 * p.kb * p.kb,
                                    0.5 * u.square()));
  return c - rho;
}

Eigen::ArrayXd fdr_local(const Eigen::ArrayXd& z, const HuberParams& p,
                         const NumericPolicy& policy) {
  Eigen::ArrayXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[i] = fdr_local(z[i], p, policy);
  }
  return out;
}

}  // namespace huberfdr
