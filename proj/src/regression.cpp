#include "huberfdr/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "huberfdr/huber_dist.hpp"
#include "huberfdr/normal.hpp"
#include "huberfdr/numeric_diff.hpp"
#include "huberfdr/stats.hpp"
#include "minimize_driver.hpp"

namespace huberfdr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rho_sum(const Eigen::ArrayXd& u, double ka, double kb) {
  const Eigen::ArrayXd e = (u - kb).max(0.0) + (u + ka).min(0.0);
  return 0.5 * (u.square().sum() - e.square().sum());
}

double residual_nll(const Eigen::ArrayXd& r, double sigma, double ka,
                    double kb) {
  const double n = static_cast<double>(r.size());
  const double constant =
      0.5 * kLog2Pi + std::log(sigma) - std::log(null_proportion(ka, kb));
  return n * constant + rho_sum(r / sigma, ka, kb);
}

// Weighted least squares step of IRLS: weights psi(u)/u, which are 1 in
// the core and k/|u| in the tails.
Eigen::VectorXd irls_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta_start, double sigma,
                          double ka, double kb) {
  Eigen::VectorXd beta = beta_start;
  Eigen::ArrayXd r = (y - X * beta).array();
  double objective = rho_sum(r / sigma, ka, kb);
  for (int iter = 0; iter < 300; ++iter) {
    const Eigen::ArrayXd u = r / sigma;
    Eigen::ArrayXd w(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (u[i] < -ka) {
        w[i] = ka / -u[i];
      } else if (u[i] > kb) {
        w[i] = kb / u[i];
      } else {
        w[i] = 1.0;
      }
    }
    const Eigen::MatrixXd Xw = X.array().colwise() * w;
    const Eigen::MatrixXd xtwx = Xw.transpose() * X;
    const Eigen::VectorXd xtwy = Xw.transpose() * y;
    Eigen::VectorXd candidate = xtwx.ldlt().solve(xtwy);

    // rho is convex, so the IRLS step can only overshoot; halve back onto
    // the descent segment if it does.
    Eigen::ArrayXd r_new = (y - X * candidate).array();
    double obj_new = rho_sum(r_new / sigma, ka, kb);
    for (int halving = 0; halving < 40 && obj_new > objective; ++halving) {
      candidate = 0.5 * (beta + candidate);
      r_new = (y - X * candidate).array();
      obj_new = rho_sum(r_new / sigma, ka, kb);
    }

    const double delta = (candidate - beta).cwiseAbs().maxCoeff();
    const double scale = 1.0 + beta.cwiseAbs().maxCoeff();
    beta = candidate;
    r = r_new;
    objective = obj_new;
    if (delta < 1e-11 * scale) break;
  }
  return beta;
}

}  // namespace

RegressionData::RegressionData(Eigen::MatrixXd design,
                               Eigen::VectorXd response,
                               std::vector<std::string> names)
    : X(std::move(design)), y(std::move(response)),
      column_names(std::move(names)) {
  if (X.rows() != y.size()) {
    throw std::invalid_argument(
        "RegressionData: X and y row counts disagree");
  }
  if (static_cast<Eigen::Index>(column_names.size()) != X.cols()) {
    throw std::invalid_argument(
        "RegressionData: one name per design column required");
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("RegressionData: values must be finite");
  }
  if (n() <= p() + 4) {
    throw std::invalid_argument(
        "RegressionData: need n > p + 4 observations");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    // Columns permuted past the numerical rank are the dependent ones.
    std::ostringstream os;
    os << "RegressionData: design matrix is rank deficient; dependent "
          "column(s):";
    const auto perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < X.cols(); ++i) {
      os << ' ' << column_names[static_cast<std::size_t>(perm(i))];
    }
    throw std::invalid_argument(os.str());
  }
}

RegressionFit fit_huber_lm(const RegressionData& data,
                           const FitOptions& options) {
  const NumericPolicy& policy = options.policy;
  const Eigen::MatrixXd& X = data.X;
  const Eigen::VectorXd& y = data.y;

  const Eigen::VectorXd beta_ols =
      X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd r_ols = y - X * beta_ols;
  double scale_start = mad(r_ols) * 1.4826;
  if (!(scale_start > 0.0)) {
    scale_start = std::sqrt(r_ols.squaredNorm() /
                            static_cast<double>(data.n() - data.p()));
  }
  if (!(scale_start > 0.0)) {
    throw std::invalid_argument("fit_huber_lm: residuals have zero spread");
  }

  Eigen::VectorXd t0(3), step(3);
  t0 << std::log(scale_start), std::log(1.5), std::log(1.5);
  step << 0.25, 0.25, 0.25;

  // Profile objective: beta is re-solved by IRLS (always from the OLS
  // start, keeping the profile stateless) for each outer point.
  const auto objective = [&](const Eigen::VectorXd& t) {
    const double sigma = std::exp(t(0));
    const double ka = std::min(std::exp(t(1)), policy.k_max);
    const double kb = std::min(std::exp(t(2)), policy.k_max);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) return kInf;
    const Eigen::VectorXd beta = irls_beta(X, y, beta_ols, sigma, ka, kb);
    const Eigen::ArrayXd r = (y - X * beta).array();
    double v = residual_nll(r, sigma, ka, kb);
    const double cap = std::log(policy.k_max);
    for (int i = 1; i < 3; ++i) {
      const double over = t(i) - cap;
      if (over > 0.0) v += 100.0 * over * over;
    }
    return std::isfinite(v) ? v : kInf;
  };

  const detail::DriverResult dr = detail::minimize_with_snapping(
      objective, t0, step, {1, 2}, policy);

  RegressionFit fit;
  fit.scale = std::exp(dr.t(0));
  fit.ka = std::min(std::exp(dr.t(1)), policy.k_max);
  fit.kb = std::min(std::exp(dr.t(2)), policy.k_max);
  fit.beta = irls_beta(X, y, beta_ols, fit.scale, fit.ka, fit.kb);
  const Eigen::ArrayXd r = (y - X * fit.beta).array();
  fit.loglik = -residual_nll(r, fit.scale, fit.ka, fit.kb);
  fit.converged = dr.converged;
  const HuberParams err{0.0, fit.scale, fit.ka, fit.kb};
  fit.boundary_ka = left_tail_vanished(err, policy);
  fit.boundary_kb = right_tail_vanished(err, policy);
  fit.n_restarts_used = dr.restarts_used;
  if (!fit.converged) {
    fit.diagnostics = "outer simplex did not meet tolerance";
  }

  if (options.compute_se && fit.converged) {
    // Observed information over beta at the optimum, scale and knots held
    // at their estimates.
    const auto nll_beta = [&](const Eigen::VectorXd& b) {
      const Eigen::ArrayXd rb = (y - X * b).array();
      return residual_nll(rb, fit.scale, fit.ka, fit.kb);
    };
    try {
      const Eigen::MatrixXd hess = numeric_hessian(nll_beta, fit.beta);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
      if (es.eigenvalues().minCoeff() > 0.0) {
        const Eigen::MatrixXd cov = hess.inverse();
        Eigen::VectorXd se(data.p());
        for (Eigen::Index i = 0; i < data.p(); ++i) {
          se(i) = std::sqrt(cov(i, i));
        }
        fit.se_beta = std::move(se);
        fit.se_near_boundary = fit.boundary_ka || fit.boundary_kb;
      }
    } catch (const std::exception&) {
      fit.se_beta.reset();
    }
  }
  return fit;
}

Eigen::VectorXd regression_fdr(const RegressionFit& fit,
                               const RegressionData& data,
                               const NumericPolicy& policy) {
  if (!fit.converged) {
    throw std::invalid_argument("regression_fdr: fit did not converge");
  }
  const HuberParams err{0.0, fit.scale, fit.ka, fit.kb};
  const Eigen::VectorXd r = data.y - data.X * fit.beta;
  Eigen::VectorXd out(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    out(i) = fdr_local(r(i), err, policy);
  }
  return out;
}

}  // namespace huberfdr
