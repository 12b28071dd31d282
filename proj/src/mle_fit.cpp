#include "huberfdr/mle_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "huberfdr/huber_dist.hpp"
#include "huberfdr/normal.hpp"
#include "huberfdr/numeric_diff.hpp"
#include "huberfdr/rng.hpp"
#include "huberfdr/stats.hpp"
#include "minimize_driver.hpp"

namespace huberfdr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Branchless rho sum: rho(u) = u^2/2 - e^2/2 where e is the overshoot
// beyond the active knot (at most one side can overshoot).
double rho_sum(const Eigen::ArrayXd& u, double ka, double kb) {
  const Eigen::ArrayXd e = (u - kb).max(0.0) + (u + ka).min(0.0);
  return 0.5 * (u.square().sum() - e.square().sum());
}

double nll_unchecked(const Eigen::ArrayXd& z, double mu, double sigma,
                     double ka, double kb) {
  const double n = static_cast<double>(z.size());
  if (n == 0.0) return 0.0;
  const Eigen::ArrayXd u = (z - mu) / sigma;
  const double constant =
      0.5 * kLog2Pi + std::log(sigma) - std::log(null_proportion(ka, kb));
  return n * constant + rho_sum(u, ka, kb);
}

// Optimization runs over t = (mu, log sigma, log ka[, log kb]); knots are
// capped at k_max inside the decode, with a quadratic pull-back beyond the
// cap so the simplex does not wander on the flat side.
struct Transform {
  bool symmetric = false;
  double k_max = 10.0;

  int dim() const { return symmetric ? 3 : 4; }

  HuberParams decode(const Eigen::VectorXd& t) const {
    HuberParams p;
    p.mu0 = t(0);
    p.sigma0 = std::exp(t(1));
    p.ka = std::min(std::exp(t(2)), k_max);
    p.kb = symmetric ? p.ka : std::min(std::exp(t(3)), k_max);
    return p;
  }

  double cap_penalty(const Eigen::VectorXd& t) const {
    const double cap = std::log(k_max);
    double pen = 0.0;
    for (int i = 2; i < dim(); ++i) {
      const double over = t(i) - cap;
      if (over > 0.0) pen += 100.0 * over * over;
    }
    return pen;
  }
};

FitResult fit_core(const ZData& data, const FitOptions& options,
                   bool symmetric) {
  if (data.n() < 8) {
    throw std::invalid_argument(
        "fit_mle: need at least 8 z-values to fit the model");
  }
  const NumericPolicy& policy = options.policy;
  const Eigen::ArrayXd z = data.values.array();

  double mu_start = median(data.values);
  double scale_start = mad(data.values) * 1.4826;
  if (!(scale_start > 0.0)) {
    scale_start = std::sqrt((z - z.mean()).square().sum() /
                            static_cast<double>(z.size() - 1));
  }
  if (!(scale_start > 0.0)) {
    throw std::invalid_argument("fit_mle: data has zero spread");
  }
  double ka_start = 1.5, kb_start = 1.5;
  if (options.initial_guess) {
    const HuberParams& g = *options.initial_guess;
    if (std::isfinite(g.mu0)) mu_start = g.mu0;
    if (g.sigma0 > 0.0 && std::isfinite(g.sigma0)) scale_start = g.sigma0;
    ka_start = std::clamp(g.ka, 1e-3, policy.k_max);
    kb_start = std::clamp(g.kb, 1e-3, policy.k_max);
  }

  const Transform tf{symmetric, policy.k_max};
  Eigen::VectorXd t0(tf.dim()), step(tf.dim());
  t0(0) = mu_start;
  t0(1) = std::log(scale_start);
  t0(2) = std::log(ka_start);
  step(0) = 0.25 * scale_start;
  step(1) = 0.25;
  step(2) = 0.25;
  if (!symmetric) {
    t0(3) = std::log(kb_start);
    step(3) = 0.25;
  }

  const auto objective = [&](const Eigen::VectorXd& t) {
    const HuberParams p = tf.decode(t);
    const double v = nll_unchecked(z, p.mu0, p.sigma0, p.ka, p.kb) +
                     tf.cap_penalty(t);
    return std::isfinite(v) ? v : kInf;
  };

  const std::vector<int> cap_coords =
      symmetric ? std::vector<int>{2} : std::vector<int>{2, 3};
  const detail::DriverResult dr = detail::minimize_with_snapping(
      objective, t0, step, cap_coords, policy);

  FitResult fit;
  fit.params = tf.decode(dr.t);
  fit.symmetric = symmetric;
  fit.p0 = null_proportion(fit.params.ka, fit.params.kb);
  fit.loglik = -neg_log_lik(fit.params, data);
  fit.converged = dr.converged;
  fit.boundary_ka = left_tail_vanished(fit.params, policy);
  fit.boundary_kb = right_tail_vanished(fit.params, policy);
  fit.n_restarts_used = dr.restarts_used;
  fit.n_evaluations = dr.evaluations;
  if (!fit.converged) {
    std::ostringstream os;
    os << "simplex did not meet tolerance (fn_tol " << policy.fn_tol
       << ", x_tol " << policy.x_tol << ") within " << policy.max_iterations
       << " iterations after " << dr.restarts_used << " restarts";
    fit.diagnostics = os.str();
  }
  return fit;
}

struct WaldErrors {
  StdErrors se;
};

// Standard errors from the observed information, in the coordinate system
// the model was actually fit in (3 parameters for the symmetric fit).
WaldErrors wald_errors(const HuberParams& p, bool symmetric,
                       const ZData& data, const NumericPolicy& policy) {
  const Eigen::ArrayXd z = data.values.array();
  WaldErrors w;
  if (symmetric) {
    Eigen::VectorXd x(3);
    x << p.mu0, p.sigma0, p.ka;
    const auto f = [&](const Eigen::VectorXd& v) {
      if (!(v(1) > 0.0) || !(v(2) > 0.0)) return kInf;
      return nll_unchecked(z, v(0), v(1), v(2), v(2));
    };
    const Eigen::MatrixXd hess = numeric_hessian(f, x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw IndefiniteHessianError(es.eigenvalues());
    }
    const Eigen::MatrixXd cov = hess.inverse();
    w.se.mu0 = std::sqrt(cov(0, 0));
    w.se.sigma0 = std::sqrt(cov(1, 1));
    w.se.ka = std::sqrt(cov(2, 2));
    w.se.kb = w.se.ka;
    const auto p0_of_k = [](double k) { return null_proportion(k, k); };
    const double h = 6.1e-6 * std::max(p.ka, 1.0);
    const double grad = (p0_of_k(p.ka + h) - p0_of_k(p.ka - h)) / (2.0 * h);
    w.se.p0 = std::sqrt(grad * grad * cov(2, 2));
  } else {
    const Eigen::Matrix4d hess = observed_information(p, data, policy);
    const Eigen::Matrix4d cov = hess.inverse();
    w.se.mu0 = std::sqrt(cov(0, 0));
    w.se.sigma0 = std::sqrt(cov(1, 1));
    w.se.ka = std::sqrt(cov(2, 2));
    w.se.kb = std::sqrt(cov(3, 3));
    Eigen::Vector2d k(p.ka, p.kb);
    const Eigen::VectorXd grad = numeric_gradient(
        [](const Eigen::VectorXd& v) {
          return null_proportion(v(0), v(1));
        },
        k);
    const Eigen::Matrix2d kk = cov.block<2, 2>(2, 2);
    w.se.p0 = std::sqrt(grad.dot(kk * grad));
  }
  return w;
}

}  // namespace

double neg_log_lik(const HuberParams& p, const ZData& data) {
  if (!std::isfinite(p.mu0) || !(p.sigma0 > 0.0) || !(p.ka > 0.0) ||
      !(p.kb > 0.0)) {
    throw std::invalid_argument("neg_log_lik: invalid HuberParams");
  }
  return nll_unchecked(data.values.array(), p.mu0, p.sigma0, p.ka, p.kb);
}

FitResult fit_mle(const ZData& data, const FitOptions& options) {
  FitResult fit = fit_core(data, options, false);
  if (options.compute_se && fit.converged && !fit.boundary_ka &&
      !fit.boundary_kb) {
    try {
      fit.se = wald_errors(fit.params, false, data, options.policy).se;
    } catch (const std::exception&) {
      fit.se.reset();
    }
  }
  return fit;
}

FitResult fit_mle_symmetric(const ZData& data, const FitOptions& options) {
  FitResult fit = fit_core(data, options, true);
  if (options.compute_se && fit.converged && !fit.boundary_ka &&
      !fit.boundary_kb) {
    try {
      fit.se = wald_errors(fit.params, true, data, options.policy).se;
    } catch (const std::exception&) {
      fit.se.reset();
    }
  }
  return fit;
}

LrtResult lrt_from_logliks(double loglik_free, double loglik_common,
                           bool boundary_caveat) {
  LrtResult r;
  r.loglik_free = loglik_free;
  r.loglik_common = loglik_common;
  r.statistic = std::max(0.0, 2.0 * (loglik_free - loglik_common));
  r.p_value = chi2_1_sf(r.statistic);
  r.boundary_caveat = boundary_caveat;
  return r;
}

LrtResult lrt_common_k(const ZData& data, const FitOptions& options) {
  FitOptions base = options;
  base.compute_se = false;
  const FitResult common = fit_mle_symmetric(data, base);
  FitResult free_fit = fit_mle(data, base);
  // The free optimum can never fall below the common one; seeding a second
  // free run from the common solution guards the nesting numerically.
  FitOptions seeded = base;
  seeded.initial_guess = common.params;
  const FitResult free_seeded = fit_mle(data, seeded);
  if (free_seeded.loglik > free_fit.loglik) free_fit = free_seeded;
  if (!common.converged || !free_fit.converged) {
    throw std::runtime_error("lrt_common_k: fit did not converge (" +
                             (common.converged ? free_fit.diagnostics
                                               : common.diagnostics) +
                             ")");
  }
  const bool caveat = common.boundary_ka || common.boundary_kb ||
                      free_fit.boundary_ka || free_fit.boundary_kb;
  return lrt_from_logliks(free_fit.loglik, common.loglik, caveat);
}

namespace {

std::string indefinite_message(const Eigen::VectorXd& ev) {
  std::ostringstream os;
  os << "observed information is not positive definite; eigenvalues:";
  for (Eigen::Index i = 0; i < ev.size(); ++i) os << ' ' << ev(i);
  return os.str();
}

}  // namespace

IndefiniteHessianError::IndefiniteHessianError(Eigen::VectorXd ev)
    : std::runtime_error(indefinite_message(ev)), eigenvalues(std::move(ev)) {}

Eigen::Matrix4d observed_information(const HuberParams& p, const ZData& data,
                                     const NumericPolicy& policy) {
  validate(p, policy);
  if (left_tail_vanished(p, policy) || right_tail_vanished(p, policy)) {
    throw std::domain_error(
        "observed_information: requires an interior point (a knot sits at "
        "the k_max boundary)");
  }
  const Eigen::ArrayXd z = data.values.array();
  Eigen::VectorXd x(4);
  x << p.mu0, p.sigma0, p.ka, p.kb;
  const auto f = [&](const Eigen::VectorXd& v) {
    if (!(v(1) > 0.0) || !(v(2) > 0.0) || !(v(3) > 0.0)) return kInf;
    return nll_unchecked(z, v(0), v(1), v(2), v(3));
  };
  const Eigen::MatrixXd hess = numeric_hessian(f, x);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(hess);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw IndefiniteHessianError(es.eigenvalues());
  }
  return hess;
}

IntervalTable delta_method_intervals(const FitResult& fit, const ZData& data,
                                     double level,
                                     const NumericPolicy& policy) {
  if (!fit.converged) {
    throw std::invalid_argument(
        "delta_method_intervals: fit did not converge");
  }
  if (fit.boundary_ka || fit.boundary_kb) {
    throw std::domain_error(
        "delta_method_intervals: MLE sits on the k_max boundary; use "
        "parametric_bootstrap or MCMC intervals instead");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("delta_method_intervals: level must lie in (0,1)");
  }
  const WaldErrors w = wald_errors(fit.params, fit.symmetric, data, policy);
  const double zq = norm_quantile(0.5 + 0.5 * level);
  const auto wald = [&](double estimate, double se) {
    return ParamInterval{estimate, estimate - zq * se, estimate + zq * se};
  };
  // Positive parameters get the Wald interval on the log scale (the scale
  // the model is fit on); it respects positivity and tracks the skew of
  // the sampling distribution better than the symmetric version.
  const auto wald_log = [&](double estimate, double se) {
    const double rel = se / estimate;
    return ParamInterval{estimate, estimate * std::exp(-zq * rel),
                         estimate * std::exp(zq * rel)};
  };
  IntervalTable t;
  t.level = level;
  t.method = "delta";
  t.mu0 = wald(fit.params.mu0, w.se.mu0);
  t.sigma0 = wald_log(fit.params.sigma0, w.se.sigma0);
  t.ka = wald_log(fit.params.ka, w.se.ka);
  t.kb = wald_log(fit.params.kb, w.se.kb);
  t.p0 = wald(fit.p0, w.se.p0);
  t.p0.lo = std::max(t.p0.lo, 0.0);
  t.p0.hi = std::min(t.p0.hi, 1.0);
  return t;
}

IntervalTable parametric_bootstrap(const FitResult& fit, const ZData& data,
                                   const BootstrapOptions& options) {
  if (!fit.converged) {
    throw std::invalid_argument("parametric_bootstrap: fit did not converge");
  }
  if (options.b < 1) {
    throw std::invalid_argument("parametric_bootstrap: B must be >= 1");
  }
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw std::domain_error("parametric_bootstrap: level must lie in (0,1)");
  }
  const int b_total = options.b;
  Eigen::MatrixXd estimates(b_total, 5);
  std::vector<char> succeeded(static_cast<std::size_t>(b_total), 0);

  FitOptions refit;
  refit.policy = options.policy;
  refit.compute_se = false;
  refit.initial_guess = fit.params;

  const auto run_one = [&](int b) {
    const ZData sim =
        sample(data.n(), fit.params, derive_seed(options.seed, b));
    const FitResult r = fit.symmetric ? fit_mle_symmetric(sim, refit)
                                      : fit_mle(sim, refit);
    if (r.converged) {
      estimates.row(b) << r.params.mu0, r.params.sigma0, r.params.ka,
          r.params.kb, r.p0;
      succeeded[static_cast<std::size_t>(b)] = 1;
    }
  };

  const int n_threads = std::max(1, options.threads);
  if (n_threads == 1 || b_total == 1) {
    for (int b = 0; b < b_total; ++b) run_one(b);
  } else {
    std::atomic<int> next{0};
    const auto worker = [&] {
      for (;;) {
        const int b = next.fetch_add(1);
        if (b >= b_total) break;
        run_one(b);
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int n_ok = 0;
  for (char c : succeeded) n_ok += c;
  const int n_failed = b_total - n_ok;
  if (n_ok == 0 ||
      static_cast<double>(n_failed) >
          options.max_failure_rate * static_cast<double>(b_total)) {
    std::ostringstream os;
    os << "parametric_bootstrap: " << n_failed << " of " << b_total
       << " replicates failed to converge (limit "
       << options.max_failure_rate * 100.0 << "%)";
    throw std::runtime_error(os.str());
  }

  const auto percentile = [&](int col) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(n_ok));
    for (int b = 0; b < b_total; ++b) {
      if (succeeded[static_cast<std::size_t>(b)]) v.push_back(estimates(b, col));
    }
    const double alpha = 1.0 - options.level;
    return std::pair<double, double>{empirical_quantile(v, alpha / 2.0),
                                     empirical_quantile(v, 1.0 - alpha / 2.0)};
  };

  IntervalTable t;
  t.level = options.level;
  t.method = "bootstrap";
  t.b_replicates = b_total;
  t.seed = options.seed;
  t.n_failed = n_failed;
  // With fewer than ~40 successful replicates the 2.5% order statistics are
  // boundary values and the percentile interval is not trustworthy.
  t.unreliable = n_ok < 40;
  const double est[5] = {fit.params.mu0, fit.params.sigma0, fit.params.ka,
                         fit.params.kb, fit.p0};
  ParamInterval* slots[5] = {&t.mu0, &t.sigma0, &t.ka, &t.kb, &t.p0};
  for (int c = 0; c < 5; ++c) {
    const auto [lo, hi] = percentile(c);
    *slots[c] = ParamInterval{est[c], lo, hi};
  }
  return t;
}

}  // namespace huberfdr
