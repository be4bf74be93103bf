// l1_projection.hpp
// Exact Euclidean projection onto {z : ||z||_1 <= radius} by sorting and
// soft-thresholding. O(N log N); N is the spread count here, so no
// linear-time selection variant is needed.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mrp/common.hpp"

namespace mrp {

struct ProjectionResult {
  VectorXd z;
  double threshold = 0.0;  // soft-threshold; 0 iff the input was feasible
  bool active = false;     // true iff the projection actually moved the point
};

inline ProjectionResult project_l1(const VectorXd& h, double radius) {
  if (!(radius > 0.0)) throw ValidationError("l1 projection radius must be positive");
  if (h.size() == 0) throw ValidationError("cannot project empty vector");
  if (!h.allFinite()) throw ValidationError("non-finite input to l1 projection");

  ProjectionResult result;
  if (h.lpNorm<1>() <= radius) {
    result.z = h;
    return result;
  }

  VectorXd magnitudes = h.cwiseAbs();
  std::sort(magnitudes.data(), magnitudes.data() + magnitudes.size(),
            std::greater<double>());

  // Largest j with b_(j) - (sum_{i<=j} b_(i) - radius)/j > 0. Ties among
  // equal magnitudes cannot change the pivot: the test value is invariant
  // under permutations of equal entries.
  Eigen::Index pivot = 0;
  double pivot_sum = 0.0;
  double running = 0.0;
  for (Eigen::Index j = 0; j < magnitudes.size(); ++j) {
    running += magnitudes[j];
    if (magnitudes[j] - (running - radius) / static_cast<double>(j + 1) > 0.0) {
      pivot = j + 1;
      pivot_sum = running;
    }
  }

  result.threshold = (pivot_sum - radius) / static_cast<double>(pivot);
  result.active = true;
  result.z = h.unaryExpr([theta = result.threshold](double v) {
    const double shrunk = std::abs(v) - theta;
    return shrunk > 0.0 ? (v > 0.0 ? shrunk : -shrunk) : 0.0;
  });
  return result;
}

}  // namespace mrp
