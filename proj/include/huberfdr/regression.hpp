#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "huberfdr/mle_fit.hpp"
#include "huberfdr/numeric_policy.hpp"

namespace huberfdr {

// Design matrix and response for a linear model with Huber-distributed
// errors: y = X beta + eps, eps ~ H(0, sigma, ka, kb).  Construction
// checks n > p + 4 and full column rank (rank-revealing QR); rank
// deficiency names the dependent columns.
struct RegressionData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;

  RegressionData(Eigen::MatrixXd design, Eigen::VectorXd response,
                 std::vector<std::string> names);

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }
};

struct RegressionFit {
  Eigen::VectorXd beta;
  double scale = 1.0;
  double ka = 1.5;
  double kb = 1.5;
  double loglik = 0.0;
  bool converged = false;
  bool boundary_ka = false;
  bool boundary_kb = false;
  std::optional<Eigen::VectorXd> se_beta;
  // Wald errors for beta lose calibration when a knot estimate sits near
  // the k_max cap.
  bool se_near_boundary = false;
  int n_restarts_used = 0;
  std::string diagnostics;
};

// Maximum likelihood over (beta, sigma, ka, kb): inner beta step by
// iteratively reweighted least squares with the Huber psi weights, outer
// Nelder-Mead over (log sigma, log ka, log kb).
RegressionFit fit_huber_lm(const RegressionData& data,
                           const FitOptions& options = {});

// fdr of each observation's residual under H(0, scale, ka, kb).
Eigen::VectorXd regression_fdr(const RegressionFit& fit,
                               const RegressionData& data,
                               const NumericPolicy& policy = {});

}  // namespace huberfdr
