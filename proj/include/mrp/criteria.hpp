// criteria.hpp
// The portfolio design objective F(w) = U(w) + mu * V(w) over spread weights:
//   U(w) = xi * (wᵀHw)/(wᵀM₀w) + zeta * ((wᵀM₁w)/(wᵀM₀w))²
//        + eta * sum_{i=2..p} ((wᵀM_iw)/(wᵀM₀w))²
//   V(w) = 1 / (wᵀM₀w)
// U is 0-homogeneous (scale-invariant); V scales as 1/alpha².

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mrp/common.hpp"
#include "mrp/market_data.hpp"
#include "mrp/moments.hpp"

namespace mrp {

// Spread weights w plus the induced asset-space weights w_p = B w. Positive
// asset weight means a long position, negative a short, zero no position.
struct PortfolioWeights {
  VectorXd w;    // N spread weights
  VectorXd w_p;  // M asset weights
};

inline PortfolioWeights make_weights(VectorXd w, const SpreadBasis& basis) {
  if (w.size() != basis.spreads())
    throw ValidationError("weight length " + std::to_string(w.size()) +
                          " does not match basis spread count " +
                          std::to_string(basis.spreads()));
  if (!w.allFinite()) throw ValidationError("non-finite weight entry");
  PortfolioWeights pw;
  pw.w_p = basis.basis * w;
  pw.w = std::move(w);
  return pw;
}

struct ObjectiveValue {
  double u = 0.0;
  double v = 0.0;
  double f = 0.0;
  double mu = 0.0;
};

// Per-lag ratios at a point, exposed for diagnostics and reused by the
// surrogate construction. ratio[i] is (wᵀM_iw)/(wᵀM₀w) for i = 1..p;
// ratio_h is the H-numerator ratio.
struct CriterionRatios {
  double q0 = 0.0;  // wᵀM₀w
  double ratio_h = 0.0;
  std::vector<double> ratio;  // index 0 unused, 1..p populated
};

namespace detail {

inline double checked_q0(const VectorXd& w, const MatrixXd& m0) {
  const double q0 = w.dot(m0 * w);
  if (!(q0 > quad_form_floor(w, m0)))
    throw NumericalError("degenerate wᵀM₀w = " + std::to_string(q0) +
                         "; weights lie in the null space of M_0");
  return q0;
}

}  // namespace detail

inline CriterionRatios eval_ratios(const VectorXd& w, const CriterionSpec& spec,
                                   const LaggedMoments& moments) {
  check_compatible(spec, moments);
  CriterionRatios out;
  out.q0 = detail::checked_q0(w, moments.lag(0));
  out.ratio_h = w.dot(spec.h_matrix * w) / out.q0;
  out.ratio.assign(static_cast<std::size_t>(moments.lag_order) + 1, 0.0);
  for (int i = 1; i <= moments.lag_order; ++i)
    out.ratio[static_cast<std::size_t>(i)] = w.dot(moments.lag(i) * w) / out.q0;
  return out;
}

inline double eval_U(const VectorXd& w, const CriterionSpec& spec, const LaggedMoments& moments) {
  const CriterionRatios r = eval_ratios(w, spec, moments);
  double value = spec.xi * r.ratio_h + spec.zeta * r.ratio[1] * r.ratio[1];
  for (int i = 2; i <= moments.lag_order; ++i) {
    const double ri = r.ratio[static_cast<std::size_t>(i)];
    value += spec.eta * ri * ri;
  }
  return value;
}

inline double eval_V(const VectorXd& w, const LaggedMoments& moments) {
  return 1.0 / detail::checked_q0(w, moments.lag(0));
}

inline ObjectiveValue eval_F(const VectorXd& w, const CriterionSpec& spec,
                             const LaggedMoments& moments, double mu) {
  if (!(mu >= 0.0)) throw ValidationError("mu must be nonnegative");
  ObjectiveValue out;
  out.mu = mu;
  out.u = eval_U(w, spec, moments);
  out.v = eval_V(w, moments);
  out.f = out.u + mu * out.v;
  return out;
}

// Analytic gradient of F = U + mu*V. With q_x = wᵀXw and r_x = q_x/q₀, each
// ratio has gradient 2(Xw - r_x M₀w)/q₀, so
//   ∇U = xi * g_h + 2*zeta*r₁*g₁ + 2*eta*sum_{i>=2} r_i*g_i,
//   ∇V = -2 M₀w / q₀².
inline VectorXd grad_F(const VectorXd& w, const CriterionSpec& spec, const LaggedMoments& moments,
                       double mu) {
  if (!(mu >= 0.0)) throw ValidationError("mu must be nonnegative");
  check_compatible(spec, moments);
  const MatrixXd& m0 = moments.lag(0);
  const double q0 = detail::checked_q0(w, m0);
  const VectorXd m0w = m0 * w;

  VectorXd grad = VectorXd::Zero(w.size());
  if (spec.xi != 0.0) {
    const VectorXd hw = spec.h_matrix * w;
    const double ratio_h = w.dot(hw) / q0;
    grad += spec.xi * 2.0 * (hw - ratio_h * m0w) / q0;
  }
  for (int i = 1; i <= moments.lag_order; ++i) {
    const double weight = (i == 1) ? spec.zeta : spec.eta;
    if (weight == 0.0) continue;
    const VectorXd miw = moments.lag(i) * w;
    const double ri = w.dot(miw) / q0;
    grad += weight * 2.0 * ri * 2.0 * (miw - ri * m0w) / q0;
  }
  grad += mu * (-2.0 / (q0 * q0)) * m0w;
  return grad;
}

}  // namespace mrp
