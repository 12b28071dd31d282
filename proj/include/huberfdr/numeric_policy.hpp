#pragma once

namespace huberfdr {

// Numeric defaults shared across modules.  Every field can be overridden
// per call; the values below are the library-wide defaults.
struct NumericPolicy {
  // Knots at or above k_max are treated as a vanished tail: the fitted fdr
  // is 1 on that side and no alternative mass is reported.  At u = 10 the
  // exponential tail holds less than 1e-22 of the total mass.
  double k_max = 10.0;

  // A knot within boundary_tol of k_max counts as sitting on the boundary.
  double boundary_tol = 1e-6;

  // Slack, in negative log-likelihood units, within which a knot estimate
  // is snapped to k_max after optimization: if capping the knot costs less
  // than this, the likelihood is flat all the way to the boundary.
  double snap_tol = 1e-6;

  // Nelder-Mead stopping rules.
  double fn_tol = 1e-10;      // simplex function-value spread
  double x_tol = 1e-8;        // simplex parameter spread
  int max_iterations = 5000;  // per simplex run
  int max_restarts = 3;       // re-runs from the perturbed solution
};

}  // namespace huberfdr
