#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <numeric>
#include <vector>

namespace huberfdr {

struct SimplexOptions {
  double fn_tol = 1e-10;  // function-value spread across vertices
  double x_tol = 1e-8;    // parameter spread across vertices
  int max_iterations = 5000;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

// Nelder-Mead simplex minimization with the standard coefficients
// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).  Fully
// deterministic: vertex ordering ties are broken by insertion index.
template <class F>
SimplexResult nelder_mead(F&& f, const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& step,
                          const SimplexOptions& opts = {}) {
  const int d = static_cast<int>(x0.size());
  const int m = d + 1;
  std::vector<Eigen::VectorXd> xs(m, x0);
  std::vector<double> fs(m);
  SimplexResult result;

  for (int i = 1; i < m; ++i) xs[i](i - 1) += step(i - 1);
  for (int i = 0; i < m; ++i) {
    fs[i] = f(xs[i]);
    ++result.evaluations;
  }

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  const auto resort = [&] {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fs[a] < fs[b]; });
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    resort();
    const int best = order[0];
    const int worst = order[m - 1];
    const int second_worst = order[m - 2];

    const double spread = fs[worst] - fs[best];
    double x_spread = 0.0;
    for (int i = 0; i < m; ++i) {
      x_spread = std::max(x_spread,
                          (xs[i] - xs[best]).cwiseAbs().maxCoeff());
    }
    if (spread <= opts.fn_tol && x_spread <= opts.x_tol) {
      result.converged = true;
      result.iterations = iter;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < m; ++i) {
      if (i != worst) centroid += xs[i];
    }
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd direction = centroid - xs[worst];
    const Eigen::VectorXd xr = centroid + direction;
    const double fr = f(xr);
    ++result.evaluations;

    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * direction;
      const double fe = f(xe);
      ++result.evaluations;
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      Eigen::VectorXd xc = centroid;
      if (outside) {
        xc += 0.5 * direction;
      } else {
        xc -= 0.5 * direction;
      }
      const double fc = f(xc);
      ++result.evaluations;
      const double reference = outside ? fr : fs[worst];
      if (fc < reference) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (int i = 0; i < m; ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = f(xs[i]);
          ++result.evaluations;
        }
      }
    }
    result.iterations = iter + 1;
  }

  resort();
  result.x = xs[order[0]];
  result.fx = fs[order[0]];
  return result;
}

}  // namespace huberfdr
