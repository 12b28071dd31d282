#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "huberfdr/huber_dist.hpp"
#include "huberfdr/mle_fit.hpp"
#include "huberfdr/regression.hpp"
#include "huberfdr/rng.hpp"
#include "huberfdr/stats.hpp"

using namespace huberfdr;

namespace {

bool close(double a, double b, double tol, double floor = 1.0) {
  return std::abs(a - b) <=
         tol * std::max(floor, std::max(std::abs(a), std::abs(b)));
}

RegressionData linear_dataset(Eigen::Index n, double b0, double b1,
                              const HuberParams& noise, std::uint64_t seed) {
  const ZData eps = sample(n, noise, seed);
  UniformStream xs(derive_seed(seed, 999));
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = 4.0 * xs.next() - 2.0;
    X(i, 0) = 1.0;
    X(i, 1) = x;
    y(i) = b0 + b1 * x + eps.values(i);
  }
  return RegressionData(std::move(X), std::move(y), {"(intercept)", "x"});
}

}  // namespace

TEST_CASE("RegressionData validation") {
  Eigen::MatrixXd X(6, 2);
  X.setOnes();
  Eigen::VectorXd y(6);
  y.setZero();
  // n <= p + 4
  CHECK_THROWS_AS(RegressionData(X, y, {"a", "b"}), std::invalid_argument);

  // rank deficiency names the dependent column
  Eigen::MatrixXd Xd(12, 3);
  for (int i = 0; i < 12; ++i) {
    Xd(i, 0) = 1.0;
    Xd(i, 1) = i;
    Xd(i, 2) = 2.0 * i;  // duplicate of column 1 up to scale
  }
  Eigen::VectorXd yd = Eigen::VectorXd::LinSpaced(12, 0.0, 1.0);
  try {
    RegressionData bad(Xd, yd, {"(intercept)", "x1", "x2"});
    FAIL("expected rank-deficiency error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("rank deficient") != std::string::npos);
    const bool names_one = msg.find("x1") != std::string::npos ||
                           msg.find("x2") != std::string::npos;
    CHECK(names_one);
  }
}

TEST_CASE("intercept-only fit matches the location-scale MLE") {
  const HuberParams noise{0.0, 1.1, 1.4, 2.0};
  const ZData z = sample(800, HuberParams{0.4, 1.1, 1.4, 2.0}, 4242);
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(z.n(), 1);
  const RegressionData data(X, z.values, {"(intercept)"});

  const RegressionFit reg = fit_huber_lm(data);
  const FitResult loc = fit_mle(z);
  REQUIRE(reg.converged);
  REQUIRE(loc.converged);
  CHECK(close(reg.beta(0), loc.params.mu0, 1e-5));
  CHECK(close(reg.scale, loc.params.sigma0, 1e-5));
  CHECK(close(reg.ka, loc.params.ka, 1e-5));
  CHECK(close(reg.kb, loc.params.kb, 1e-5));
  CHECK(close(reg.loglik, loc.loglik, 1e-9));
}

TEST_CASE("scaling y scales beta and sigma, leaves the knots alone") {
  const RegressionData data =
      linear_dataset(1500, 1.0, -2.0, HuberParams{0.0, 1.0, 1.5, 1.5}, 11);
  const double c = 3.5;
  RegressionData scaled(data.X, c * data.y, data.column_names);
  const RegressionFit base = fit_huber_lm(data);
  const RegressionFit big = fit_huber_lm(scaled);
  REQUIRE(base.converged);
  REQUIRE(big.converged);
  CHECK(close(big.beta(0), c * base.beta(0), 1e-4));
  CHECK(close(big.beta(1), c * base.beta(1), 1e-4));
  CHECK(close(big.scale, c * base.scale, 1e-4));
  CHECK(close(big.ka, base.ka, 1e-4));
  CHECK(close(big.kb, base.kb, 1e-4));
}

TEST_CASE("fit_huber_lm recovers a simulated linear model") {
  const RegressionData data =
      linear_dataset(5000, 2.0, 3.0, HuberParams{0.0, 1.0, 1.5, 1.5}, 314159);
  const RegressionFit fit = fit_huber_lm(data);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.beta(0) - 2.0) < 0.1);
  CHECK(std::abs(fit.beta(1) - 3.0) < 0.1);
  CHECK(std::abs(fit.scale - 1.0) < 0.1);
  CHECK(std::abs(fit.ka - 1.5) < 0.5);
  CHECK(std::abs(fit.kb - 1.5) < 0.5);
  REQUIRE(fit.se_beta.has_value());
  CHECK((*fit.se_beta)(0) > 0.0);
  CHECK(!fit.se_near_boundary);

  // loglik consistent with the residual likelihood at the optimum
  const Eigen::ArrayXd r0 = (data.y - data.X * fit.beta).array();
  CHECK(fit.loglik ==
        doctest::Approx(-neg_log_lik(HuberParams{0.0, fit.scale, fit.ka,
                                                 fit.kb},
                                     ZData(r0.matrix(), "resid")))
            .epsilon(1e-9));

  // monotone outer loop: the optimum is at least as good as the OLS +
  // scaled-MAD + k = 1.5 starting configuration
  const Eigen::VectorXd beta_ols = data.X.colPivHouseholderQr().solve(data.y);
  const Eigen::VectorXd r_start = data.y - data.X * beta_ols;
  const double mad_start = mad(r_start) * 1.4826;
  const double start_loglik = -neg_log_lik(
      HuberParams{0.0, mad_start, 1.5, 1.5}, ZData(r_start, "start"));
  CHECK(fit.loglik >= start_loglik - 1e-9);
}

TEST_CASE("regression_fdr: core residuals are all 1, outliers decay") {
  const RegressionData data =
      linear_dataset(400, 0.0, 1.0, HuberParams{0.0, 1.0, 1.5, 1.5}, 21);

  RegressionFit fit;
  fit.beta = Eigen::VectorXd::Zero(2);
  fit.beta(1) = 1.0;
  fit.scale = 1.0;
  fit.ka = 1.5;
  fit.kb = 1.5;
  fit.converged = true;

  // y exactly on the line: residual 0 gives fdr 1
  RegressionData exact(data.X, data.X * fit.beta, data.column_names);
  const Eigen::VectorXd all_one = regression_fdr(fit, exact);
  for (Eigen::Index i = 0; i < all_one.size(); ++i) {
    CHECK(all_one(i) == 1.0);
  }

  // planted 6-sigma outlier: fdr = exp(-(6 - 1.5)^2 / 2) (oracle value
  // 4.0065297392951068e-05), cross-checked through p0 f0 / f.
  Eigen::VectorXd y = data.X * fit.beta;
  y(0) += 6.0;
  RegressionData planted(data.X, y, data.column_names);
  const Eigen::VectorXd fdr = regression_fdr(fit, planted);
  CHECK(fdr(0) == doctest::Approx(4.0065297392951068e-05).epsilon(1e-12));
  const HuberParams err{0.0, 1.0, 1.5, 1.5};
  const double via_ratio = null_proportion(1.5, 1.5) * norm_pdf(6.0) /
                           density(6.0, err);
  CHECK(fdr(0) == doctest::Approx(via_ratio).epsilon(1e-12));
  for (Eigen::Index i = 1; i < fdr.size(); ++i) CHECK(fdr(i) == 1.0);
}

TEST_CASE("regression_fdr requires a converged fit") {
  const RegressionData data =
      linear_dataset(100, 0.0, 1.0, HuberParams{0.0, 1.0, 1.5, 1.5}, 77);
  RegressionFit fit;
  fit.beta = Eigen::VectorXd::Zero(2);
  fit.converged = false;
  CHECK_THROWS_AS(regression_fdr(fit, data), std::invalid_argument);
}

TEST_CASE("near-normal residuals flag the knot boundary") {
  // Seed chosen so the simulated gaussian residuals have no chance tail
  // excess: both knots run to the cap.
  UniformStream stream(11);
  Eigen::MatrixXd X(600, 2);
  Eigen::VectorXd y(600);
  for (int i = 0; i < 600; ++i) {
    const double x = stream.next();
    X(i, 0) = 1.0;
    X(i, 1) = x;
    y(i) = 1.0 + 0.5 * x + stream.next_normal();
  }
  const RegressionData data(X, y, {"(intercept)", "x"});
  const RegressionFit fit = fit_huber_lm(data);
  REQUIRE(fit.converged);
  CHECK(fit.boundary_ka);
  CHECK(fit.boundary_kb);
  if (fit.se_beta) CHECK(fit.se_near_boundary);
}
