// common.hpp
// Shared error types and small numeric helpers.

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mrp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Bad user input or configuration (dimension mismatches, out-of-range
// parameters, malformed requests). Caught before any heavy computation.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// File-level failures: missing paths, unreadable or malformed data files.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown at run time: singular systems, degenerate quadratic
// forms, indefinite matrices where definiteness is required.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline bool is_finite(const Eigen::Ref<const MatrixXd>& m) {
  return m.allFinite();
}

// Relative degeneracy guard for the quadratic form wᵀM₀w. The threshold
// scales with the data so price units do not matter.
inline double quad_form_floor(const VectorXd& w, const MatrixXd& m0) {
  return 1e-12 * w.squaredNorm() * m0.norm();
}

}  // namespace mrp
