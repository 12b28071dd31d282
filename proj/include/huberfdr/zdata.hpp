#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>

namespace huberfdr {

// A vector of z-values in input order plus a dataset label.  Values must
// be finite; fitting routines additionally require n >= 8 (a 4-parameter
// fit below that is not identifiable in practice), but other consumers --
// plotting, prior-only MCMC runs -- accept any length.
struct ZData {
  Eigen::VectorXd values;
  std::string label;

  ZData() = default;
  ZData(Eigen::VectorXd v, std::string name)
      : values(std::move(v)), label(std::move(name)) {
    if (values.size() > 0 && !values.allFinite()) {
      throw std::invalid_argument("ZData: all z-values must be finite");
    }
  }

  Eigen::Index n() const { return values.size(); }
};

}  // namespace huberfdr
