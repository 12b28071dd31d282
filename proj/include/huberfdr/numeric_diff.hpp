#pragma once

#include <Eigen/Core>
#include <cmath>

namespace huberfdr {

// Central-difference gradient; step ~ eps^(1/3) scaled per coordinate.
template <class F>
Eigen::VectorXd numeric_gradient(F&& f, const Eigen::VectorXd& x,
                                 double rel_step = 6.1e-6) {
  const Eigen::Index d = x.size();
  Eigen::VectorXd g(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = rel_step * std::max(std::abs(x(i)), 1.0);
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Central-difference Hessian; step ~ eps^(1/4) scaled per coordinate.
// Symmetric by construction (each off-diagonal pair is evaluated once).
template <class F>
Eigen::MatrixXd numeric_hessian(F&& f, const Eigen::VectorXd& x,
                                double rel_step = 1.2e-4) {
  const Eigen::Index d = x.size();
  Eigen::VectorXd h(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    h(i) = rel_step * std::max(std::abs(x(i)), 1.0);
  }
  Eigen::MatrixXd hess(d, d);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h(i);
    xm(i) -= h(i);
    hess(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h(i) * h(i));
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
      xpp(i) += h(i);
      xpp(j) += h(j);
      xpm(i) += h(i);
      xpm(j) -= h(j);
      xmp(i) -= h(i);
      xmp(j) += h(j);
      xmm(i) -= h(i);
      xmm(j) -= h(j);
      const double v =
          (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h(i) * h(j));
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

}  // namespace huberfdr
