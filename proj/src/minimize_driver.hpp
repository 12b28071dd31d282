#pragma once

// Internal: Nelder-Mead driver shared by the location-scale and regression
// fits.  Runs the simplex with restarts, then probes each designated
// log-knot coordinate against the log(k_max) cap and snaps it there when
// the likelihood is flat to within snap_tol, re-optimizing the remaining
// coordinates after every snap.

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "huberfdr/nelder_mead.hpp"
#include "huberfdr/numeric_policy.hpp"

namespace huberfdr::detail {

struct DriverResult {
  Eigen::VectorXd t;
  double f = 0.0;
  bool converged = false;
  int restarts_used = 0;
  int evaluations = 0;
  std::vector<bool> snapped;  // per coordinate, true when fixed at the cap
};

template <class F>
DriverResult minimize_with_snapping(F&& objective, const Eigen::VectorXd& t0,
                                    const Eigen::VectorXd& step,
                                    const std::vector<int>& cap_coords,
                                    const NumericPolicy& policy) {
  const double t_cap = std::log(policy.k_max);
  const Eigen::Index d = t0.size();

  DriverResult out;
  out.t = t0;
  out.snapped.assign(static_cast<std::size_t>(d), false);

  SimplexOptions simplex_opts;
  simplex_opts.fn_tol = policy.fn_tol;
  simplex_opts.x_tol = policy.x_tol;
  simplex_opts.max_iterations = policy.max_iterations;

  // Minimize over the coordinates not yet snapped, writing back into out.t.
  const auto run_free = [&](double step_scale) -> SimplexResult {
    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!out.snapped[static_cast<std::size_t>(i)]) free_idx.push_back(i);
    }
    Eigen::VectorXd x0(free_idx.size()), s(free_idx.size());
    for (std::size_t j = 0; j < free_idx.size(); ++j) {
      x0(static_cast<Eigen::Index>(j)) = out.t(free_idx[j]);
      s(static_cast<Eigen::Index>(j)) = step(free_idx[j]) * step_scale;
    }
    Eigen::VectorXd full = out.t;
    const auto reduced = [&](const Eigen::VectorXd& xf) {
      for (std::size_t j = 0; j < free_idx.size(); ++j) {
        full(free_idx[j]) = xf(static_cast<Eigen::Index>(j));
      }
      return objective(full);
    };
    SimplexResult res = nelder_mead(reduced, x0, s, simplex_opts);
    for (std::size_t j = 0; j < free_idx.size(); ++j) {
      out.t(free_idx[j]) = res.x(static_cast<Eigen::Index>(j));
    }
    out.evaluations += res.evaluations;
    return res;
  };

  const auto optimize_phase = [&] {
    SimplexResult res = run_free(1.0);
    for (int r = 0; r < policy.max_restarts; ++r) {
      const double previous = res.fx;
      res = run_free(0.25);
      ++out.restarts_used;
      if (previous - res.fx < policy.fn_tol) break;
    }
    out.f = res.fx;
    out.converged = res.converged;
  };

  optimize_phase();
  for (;;) {
    bool snapped_any = false;
    for (int c : cap_coords) {
      const auto ci = static_cast<std::size_t>(c);
      if (out.snapped[ci]) continue;
      Eigen::VectorXd probe = out.t;
      probe(c) = t_cap;
      const double f_probe = objective(probe);
      ++out.evaluations;
      if (f_probe <= out.f + policy.snap_tol) {
        out.snapped[ci] = true;
        out.t(c) = t_cap;
        out.f = f_probe;
        snapped_any = true;
      }
    }
    if (!snapped_any) break;
    optimize_phase();
  }
  return out;
}

}  // namespace huberfdr::detail
