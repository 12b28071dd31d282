#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "huberfdr/numeric_policy.hpp"
#include "huberfdr/zdata.hpp"

namespace huberfdr {

// Uniform priors: mu uniform on mu_range, log sigma uniform on
// log_sigma_range, and ka, kb each uniform (on the k scale) over k_range.
struct PriorSpec {
  std::pair<double, double> mu_range{-10.0, 10.0};
  std::pair<double, double> log_sigma_range{-2.302585092994046,
                                            2.302585092994046};
  std::pair<double, double> k_range{0.05, 10.0};

  // Data-driven defaults: mu spans the data by a full range either side,
  // sigma spans a factor of 10 around the scaled MAD.
  static PriorSpec default_for(const ZData& data,
                               const NumericPolicy& policy = {});

  void validate(const NumericPolicy& policy = {}) const;
};

struct McmcOptions {
  Eigen::Index iters = 20000;
  Eigen::Index burnin = 5000;
  std::uint64_t seed = 1;
  NumericPolicy policy;
};

// Random-walk Metropolis output.  draws has one row per iteration
// (burn-in included) with columns (mu0, sigma0, ka, kb, p0).
struct PosteriorChain {
  Eigen::MatrixXd draws;
  Eigen::Index burnin = 0;
  double acceptance_rate = 0.0;  // over post-burn-in transitions
  std::uint64_t seed = 0;
  std::string warning;  // empty when none

  Eigen::Index n_post() const { return draws.rows() - burnin; }
};

// Joint random-walk Metropolis on (mu, log sigma, log ka, log kb) with
// independent normal steps per coordinate.  Proposal scales follow
// Robbins-Monro adaptation toward 0.30 acceptance during burn-in only and
// are frozen afterwards.  Deterministic given the seed.
PosteriorChain run_chain(const ZData& data, const PriorSpec& prior,
                         const McmcOptions& options = {});

struct ParamSummary {
  double mean = 0.0, median = 0.0, lo = 0.0, hi = 0.0;
};

struct PosteriorSummary {
  double level = 0.95;
  ParamSummary mu0, sigma0, ka, kb, p0;
};

// Means, medians and equal-tailed credible intervals (order statistics of
// the post-burn-in draws).  Requires at least 1000 post-burn-in draws.
PosteriorSummary posterior_summary(const PosteriorChain& chain,
                                   double level = 0.95);

struct ParamDiagnostics {
  double lag1_autocorr = 0.0;
  std::optional<double> ess;  // empty when the chain is degenerate
  bool degenerate = false;
};

struct ChainDiagnostics {
  double acceptance_rate = 0.0;  // recomputed from the stored draws
  std::array<ParamDiagnostics, 4> params;     // mu0, sigma0, ka, kb
  std::array<double, 4> split_half_discrepancy{};  // |mean(1st) - mean(2nd)|
};

// Acceptance rate, lag-1 autocorrelations, initial-positive-sequence
// effective sample sizes and split-half mean discrepancies.
ChainDiagnostics chain_diagnostics(const PosteriorChain& chain);

}  // namespace huberfdr
