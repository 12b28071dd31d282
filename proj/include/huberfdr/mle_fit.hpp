#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "huberfdr/huber_params.hpp"
#include "huberfdr/numeric_policy.hpp"
#include "huberfdr/zdata.hpp"

namespace huberfdr {

struct FitOptions {
  NumericPolicy policy;
  // Optional starting point; defaults to median / scaled-MAD / k = 1.5.
  std::optional<HuberParams> initial_guess;
  // Skip the standard-error pass (used by bootstrap replicates).
  bool compute_se = true;
};

struct StdErrors {
  double mu0 = 0.0, sigma0 = 0.0, ka = 0.0, kb = 0.0, p0 = 0.0;
};

struct FitResult {
  HuberParams params;
  bool symmetric = false;
  double loglik = 0.0;
  double p0 = 1.0;
  bool converged = false;
  bool boundary_ka = false;
  bool boundary_kb = false;
  std::optional<StdErrors> se;
  int n_restarts_used = 0;
  int n_evaluations = 0;
  std::string diagnostics;  // filled on failure
};

struct LrtResult {
  double loglik_free = 0.0;
  double loglik_common = 0.0;
  double statistic = 0.0;  // 2 (free - common), clamped at 0
  double p_value = 1.0;    // chi-squared, 1 df, upper tail
  // Set when either fit ends on the knot boundary, where the chi-squared
  // calibration is unreliable.
  bool boundary_caveat = false;
};

// -sum_i log f^H(z_i).  Works for any n >= 0 (empty data gives 0).
double neg_log_lik(const HuberParams& p, const ZData& data);

// Full MLE of (mu0, sigma0, ka, kb) by Nelder-Mead over
// (mu, log sigma, log ka, log kb), log k capped at log k_max.  This is
// the exact likelihood optimum, not the classical simultaneous
// location-scale estimating equations it approximates.
// Throws std::invalid_argument when n < 8; optimizer failure is reported
// through converged/diagnostics, never as a partial answer.
FitResult fit_mle(const ZData& data, const FitOptions& options = {});

// Same with ka = kb = k.
FitResult fit_mle_symmetric(const ZData& data, const FitOptions& options = {});

// Likelihood ratio test of ka = kb against the free model.
LrtResult lrt_common_k(const ZData& data, const FitOptions& options = {});
LrtResult lrt_from_logliks(double loglik_free, double loglik_common,
                           bool boundary_caveat = false);

// Thrown by observed_information when the numerical Hessian is not
// positive definite (a non-optimum or a boundary case).
class IndefiniteHessianError : public std::runtime_error {
 public:
  explicit IndefiniteHessianError(Eigen::VectorXd ev);
  Eigen::VectorXd eigenvalues;
};

// Numerical Hessian of neg_log_lik in the natural (mu0, sigma0, ka, kb)
// coordinates.  Requires an interior point (no knot near k_max).
Eigen::Matrix4d observed_information(const HuberParams& p, const ZData& data,
                                     const NumericPolicy& policy = {});

struct ParamInterval {
  double estimate = 0.0, lo = 0.0, hi = 0.0;
};

struct IntervalTable {
  ParamInterval mu0, sigma0, ka, kb, p0;
  double level = 0.95;
  std::string method;      // "delta" or "bootstrap"
  int b_replicates = 0;    // bootstrap only
  std::uint64_t seed = 0;  // bootstrap only
  int n_failed = 0;        // bootstrap only
  bool unreliable = false; // too few successful replicates for the level
};

// Wald intervals from the inverse observed information; the p0 interval
// propagates the numerical gradient of null_proportion through the
// (ka, kb) block.  Throws std::domain_error for boundary fits (use
// parametric_bootstrap or MCMC there).
IntervalTable delta_method_intervals(const FitResult& fit, const ZData& data,
                                     double level = 0.95,
                                     const NumericPolicy& policy = {});

struct BootstrapOptions {
  int b = 1000;
  std::uint64_t seed = 1;
  double level = 0.95;
  int threads = 1;  // replicate seeds are independent of the thread count
  double max_failure_rate = 0.05;
  NumericPolicy policy;
};

// Percentile intervals from B refits of samples drawn from the fitted
// distribution.  Deterministic given the seed.  Throws std::runtime_error
// when more than max_failure_rate of the replicates fail to converge.
IntervalTable parametric_bootstrap(const FitResult& fit, const ZData& data,
                                   const BootstrapOptions& options = {});

}  // namespace huberfdr
