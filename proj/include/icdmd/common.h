#pragma once

#include <vector>

#include <Eigen/Dense>

namespace icdmd {

/// Closed interval [lo, hi].
struct Interval {
  double lo{-1.0};
  double hi{1.0};

  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

/// Axis-aligned box, one interval per state dimension.
using Box = std::vector<Interval>;

/// States stored column-wise: a p x n matrix holds n points in ℝᵖ.
using StateMatrix = Eigen::MatrixXd;

}  // namespace icdmd
