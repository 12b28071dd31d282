#include "huberfdr/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "huberfdr/huber_dist.hpp"
#include "huberfdr/mle_fit.hpp"
#include "huberfdr/rng.hpp"
#include "huberfdr/stats.hpp"

namespace huberfdr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double midpoint(const std::pair<double, double>& r) {
  return 0.5 * (r.first + r.second);
}

double width(const std::pair<double, double>& r) {
  return r.second - r.first;
}

void require_interval(const std::pair<double, double>& r, const char* name) {
  if (!std::isfinite(r.first) || !std::isfinite(r.second) ||
      !(r.first < r.second)) {
    throw std::invalid_argument(std::string("PriorSpec: ") + name +
                                " must be a finite non-empty interval");
  }
}

}  // namespace

PriorSpec PriorSpec::default_for(const ZData& data,
                                 const NumericPolicy& policy) {
  PriorSpec prior;
  prior.k_range = {0.05, policy.k_max};
  if (data.n() >= 2) {
    const double lo = data.values.minCoeff();
    const double hi = data.values.maxCoeff();
    const double range = hi - lo;
    if (range > 0.0) {
      prior.mu_range = {lo - range, hi + range};
      double s = mad(data.values) * 1.4826;
      if (!(s > 0.0)) s = range / 4.0;
      prior.log_sigma_range = {std::log(s / 10.0), std::log(10.0 * s)};
    }
  }
  return prior;
}

void PriorSpec::validate(const NumericPolicy& policy) const {
  require_interval(mu_range, "mu_range");
  require_interval(log_sigma_range, "log_sigma_range");
  require_interval(k_range, "k_range");
  if (!(k_range.first > 0.0) || k_range.second > policy.k_max) {
    throw std::invalid_argument(
        "PriorSpec: k_range must lie within (0, k_max]");
  }
}

PosteriorChain run_chain(const ZData& data, const PriorSpec& prior,
                         const McmcOptions& options) {
  prior.validate(options.policy);
  if (options.iters < 1) {
    throw std::invalid_argument("run_chain: iters must be >= 1");
  }
  if (options.burnin < 0 || options.burnin >= options.iters) {
    throw std::invalid_argument("run_chain: need iters > burnin >= 0");
  }

  const double tk_lo = std::log(prior.k_range.first);
  const double tk_hi = std::log(prior.k_range.second);

  const auto in_support = [&](const Eigen::Vector4d& x) {
    return x(0) >= prior.mu_range.first && x(0) <= prior.mu_range.second &&
           x(1) >= prior.log_sigma_range.first &&
           x(1) <= prior.log_sigma_range.second && x(2) >= tk_lo &&
           x(2) <= tk_hi && x(3) >= tk_lo && x(3) <= tk_hi;
  };

  // Likelihood times prior in the sampling coordinates
  // (mu, log sigma, log ka, log kb).  The knot priors are uniform on the k
  // scale, so the move to log k contributes the Jacobian log ka + log kb;
  // mu and log sigma are already sampled on their uniform scales.
  const auto log_target = [&](const Eigen::Vector4d& x) {
    if (!in_support(x)) return kNegInf;
    const HuberParams p{x(0), std::exp(x(1)), std::exp(x(2)),
                        std::exp(x(3))};
    const double v = -neg_log_lik(p, data) + x(2) + x(3);
    return std::isfinite(v) ? v : kNegInf;
  };

  const auto clamp_into = [](double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
  };

  Eigen::Vector4d x;
  Eigen::Vector4d base_scale;
  if (data.n() >= 8) {
    const double center = median(data.values);
    double spread = mad(data.values) * 1.4826;
    if (!(spread > 0.0)) spread = std::exp(midpoint(prior.log_sigma_range));
    x(0) = clamp_into(center, prior.mu_range.first, prior.mu_range.second);
    x(1) = clamp_into(std::log(spread), prior.log_sigma_range.first,
                      prior.log_sigma_range.second);
    x(2) = clamp_into(std::log(1.5), tk_lo, tk_hi);
    x(3) = x(2);
    // Rough asymptotic posterior scales; Robbins-Monro trims the common
    // factor toward the target acceptance.
    const double rn = std::sqrt(static_cast<double>(data.n()));
    base_scale << 1.2 * spread / rn, 0.85 / rn, 4.8 / rn, 4.8 / rn;
  } else {
    x << midpoint(prior.mu_range), midpoint(prior.log_sigma_range),
        0.5 * (tk_lo + tk_hi), 0.5 * (tk_lo + tk_hi);
    base_scale << width(prior.mu_range) / 10.0,
        width(prior.log_sigma_range) / 10.0, (tk_hi - tk_lo) / 10.0,
        (tk_hi - tk_lo) / 10.0;
  }

  UniformStream stream(options.seed);
  double log_gain = 0.0;
  double current_target = log_target(x);
  Eigen::MatrixXd draws(options.iters, 5);
  const Eigen::Index count_from = std::max<Eigen::Index>(options.burnin, 1);
  long accepted = 0;
  long counted = 0;

  for (Eigen::Index t = 0; t < options.iters; ++t) {
    const double gain = std::exp(log_gain);
    Eigen::Vector4d proposal;
    for (int j = 0; j < 4; ++j) {
      proposal(j) = x(j) + gain * base_scale(j) * stream.next_normal();
    }
    const double proposal_target = log_target(proposal);
    double alpha = 0.0;
    if (proposal_target > kNegInf) {
      alpha = std::min(1.0, std::exp(proposal_target - current_target));
    }
    const bool accept = stream.next() < alpha;
    if (accept) {
      x = proposal;
      current_target = proposal_target;
    }
    if (t < options.burnin) {
      log_gain += std::pow(static_cast<double>(t) + 1.0, -0.6) * (alpha - 0.30);
    }
    if (t >= count_from) {
      ++counted;
      accepted += accept ? 1 : 0;
    }
    const double sigma = std::exp(x(1));
    const double ka = std::exp(x(2));
    const double kb = std::exp(x(3));
    draws.row(t) << x(0), sigma, ka, kb, null_proportion(ka, kb);
  }

  PosteriorChain chain;
  chain.draws = std::move(draws);
  chain.burnin = options.burnin;
  chain.seed = options.seed;
  chain.acceptance_rate =
      counted > 0 ? static_cast<double>(accepted) / static_cast<double>(counted)
                  : 0.0;
  if (counted > 0 &&
      (chain.acceptance_rate < 0.05 || chain.acceptance_rate > 0.8)) {
    std::ostringstream os;
    os << "acceptance rate " << chain.acceptance_rate
       << " outside [0.05, 0.8] after adaptation";
    chain.warning = os.str();
  }
  return chain;
}

PosteriorSummary posterior_summary(const PosteriorChain& chain, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("posterior_summary: level must lie in (0,1)");
  }
  const Eigen::Index m = chain.n_post();
  if (m < 1000) {
    throw std::invalid_argument(
        "posterior_summary: need at least 1000 post-burn-in draws");
  }
  const auto post = chain.draws.bottomRows(m);
  const double alpha = 1.0 - level;
  PosteriorSummary s;
  s.level = level;
  ParamSummary* slots[5] = {&s.mu0, &s.sigma0, &s.ka, &s.kb, &s.p0};
  for (int c = 0; c < 5; ++c) {
    std::vector<double> v(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = post(i, c);
    ParamSummary ps;
    ps.mean = post.col(c).mean();
    ps.median = median(v);
    ps.lo = empirical_quantile(v, alpha / 2.0);
    ps.hi = empirical_quantile(v, 1.0 - alpha / 2.0);
    *slots[c] = ps;
  }
  return s;
}

ChainDiagnostics chain_diagnostics(const PosteriorChain& chain) {
  if (chain.draws.rows() == 0) {
    throw std::invalid_argument("chain_diagnostics: empty chain");
  }
  const Eigen::Index m = chain.n_post();
  if (m < 2) {
    throw std::invalid_argument(
        "chain_diagnostics: need at least 2 post-burn-in draws");
  }
  const auto post = chain.draws.bottomRows(m);

  ChainDiagnostics d;
  const Eigen::Index from = std::max<Eigen::Index>(chain.burnin, 1);
  long changed = 0;
  long total = 0;
  for (Eigen::Index t = from; t < chain.draws.rows(); ++t) {
    ++total;
    if ((chain.draws.row(t).array() != chain.draws.row(t - 1).array()).any()) {
      ++changed;
    }
  }
  d.acceptance_rate =
      total > 0 ? static_cast<double>(changed) / static_cast<double>(total)
                : 0.0;

  for (int c = 0; c < 4; ++c) {
    Eigen::ArrayXd centered(m);
    for (Eigen::Index i = 0; i < m; ++i) centered(i) = post(i, c);
    const double mean = centered.mean();
    centered -= mean;
    const double var = centered.square().sum() / static_cast<double>(m);

    ParamDiagnostics pd;
    if (!(var > 0.0)) {
      pd.degenerate = true;
      pd.lag1_autocorr = std::numeric_limits<double>::quiet_NaN();
    } else {
      const auto acf = [&](Eigen::Index lag) {
        double s = 0.0;
        for (Eigen::Index i = 0; i + lag < m; ++i) {
          s += centered(i) * centered(i + lag);
        }
        return s / (var * static_cast<double>(m));
      };
      pd.lag1_autocorr = acf(1);
      // Geyer's initial positive sequence: accumulate paired
      // autocorrelations while their sums stay positive.
      double tau = -1.0;
      const Eigen::Index max_pairs = std::min<Eigen::Index>(m / 2, 2000);
      for (Eigen::Index j = 0; j < max_pairs && 2 * j + 1 < m; ++j) {
        const double gamma = acf(2 * j) + acf(2 * j + 1);
        if (gamma <= 0.0) break;
        tau += 2.0 * gamma;
      }
      tau = std::max(tau, 1e-12);
      pd.ess = static_cast<double>(m) / tau;
    }
    d.params[static_cast<std::size_t>(c)] = pd;

    const Eigen::Index half = m / 2;
    const double m1 = post.col(c).head(half).mean();
    const double m2 = post.col(c).tail(m - half).mean();
    d.split_half_discrepancy[static_cast<std::size_t>(c)] = std::abs(m1 - m2);
  }
  return d;
}

}  // namespace huberfdr
