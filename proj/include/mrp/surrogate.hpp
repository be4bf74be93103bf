// surrogate.hpp
// Strongly convex quadratic model of F at an anchor point, built by
// linearizing each lag ratio inside its square and fully linearizing the
// remaining ratio and variance terms, then adding a proximal tau-term:
//
//   model(w) = wᵀA w + bᵀw,   A = A_U + tau*I,
//   A_U = zeta*g₁g₁ᵀ + eta*sum_{i>=2} g_ig_iᵀ,
//   b   = b_U + mu*b_V - 2*tau*anchor,
//   b_U = xi*g_h + 2*zeta*r₁*g₁ + 2*eta*sum_{i>=2} r_i*g_i,
//   b_V = -2 M₀w / q₀²,
//
// where g_x = 2(Xw - r_x M₀w)/q₀ is the gradient of the ratio (wᵀXw)/(wᵀM₀w)
// at the anchor. Because every g_x is orthogonal to the anchor, the model's
// gradient at the anchor is exactly b_U + mu*b_V = ∇F(anchor) and A_U is a
// nonnegative sum of rank-1 terms, hence positive semidefinite.

#pragma once

#include <Eigen/Dense>

#include "mrp/common.hpp"
#include "mrp/criteria.hpp"
#include "mrp/moments.hpp"

namespace mrp {

struct QuadraticModel {
  MatrixXd a;      // symmetric PSD; with tau > 0, lambda_min >= tau
  VectorXd b;
  double tau = 0.0;
  VectorXd anchor;
};

// Default proximal weight: small relative to the spread covariance scale,
// positive so the inner linear systems stay definite.
inline double default_tau(const LaggedMoments& moments) {
  return 1e-6 * moments.lag(0).trace() / static_cast<double>(moments.dim());
}

inline QuadraticModel build_surrogate(const VectorXd& anchor, const CriterionSpec& spec,
                                      const LaggedMoments& moments, double mu, double tau) {
  if (!(mu >= 0.0)) throw ValidationError("mu must be nonnegative");
  if (!(tau >= 0.0)) throw ValidationError("tau must be nonnegative");
  check_compatible(spec, moments);

  const Eigen::Index n = anchor.size();
  const MatrixXd& m0 = moments.lag(0);
  const double q0 = detail::checked_q0(anchor, m0);
  const VectorXd m0w = m0 * anchor;

  QuadraticModel model;
  model.tau = tau;
  model.anchor = anchor;
  model.a = MatrixXd::Zero(n, n);
  model.b = VectorXd::Zero(n);

  if (spec.xi != 0.0) {
    const VectorXd hw = spec.h_matrix * anchor;
    const double ratio_h = anchor.dot(hw) / q0;
    model.b += spec.xi * 2.0 * (hw - ratio_h * m0w) / q0;
  }
  for (int i = 1; i <= moments.lag_order; ++i) {
    const double weight = (i == 1) ? spec.zeta : spec.eta;
    if (weight == 0.0) continue;
    const VectorXd miw = moments.lag(i) * anchor;
    const double ri = anchor.dot(miw) / q0;
    const VectorXd gi = 2.0 * (miw - ri * m0w) / q0;
    model.a += weight * gi * gi.transpose();
    model.b += 2.0 * weight * ri * gi;
  }
  model.a = 0.5 * (model.a + model.a.transpose());
  model.a.diagonal().array() += tau;

  model.b += mu * (-2.0 / (q0 * q0)) * m0w;
  model.b -= 2.0 * tau * anchor;
  return model;
}

inline double eval_surrogate(const QuadraticModel& model, const VectorXd& w) {
  if (w.size() != model.b.size()) throw ValidationError("surrogate dimension mismatch");
  return w.dot(model.a * w) + model.b.dot(w);
}

}  // namespace mrp
