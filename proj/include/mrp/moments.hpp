// moments.hpp
// Lagged autocovariance estimation for spread series, and assembly of the
// mean-reversion criterion weights (predictability / portmanteau / crossing /
// penalized crossing) used by the objective.

#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "mrp/common.hpp"
#include "mrp/market_data.hpp"

namespace mrp {

// Symmetrized lagged autocovariance matrices M_0..M_p of a spread series.
// Every downstream use is a quadratic form wᵀM_iw, which only sees the
// symmetric part, and symmetrizing makes the analytic gradients exact.
struct LaggedMoments {
  std::vector<MatrixXd> m;  // p+1 symmetric N x N matrices, m[i] is lag i
  int lag_order = 0;        // p >= 1
  std::vector<std::string> warnings;

  Eigen::Index dim() const { return m.empty() ? 0 : m.front().rows(); }
  const MatrixXd& lag(int i) const { return m.at(static_cast<std::size_t>(i)); }
};

enum class CriterionKind { predictability, portmanteau, crossing, penalized_crossing };

inline std::string to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::predictability: return "pre";
    case CriterionKind::portmanteau: return "por";
    case CriterionKind::crossing: return "cro";
    case CriterionKind::penalized_crossing: return "pcro";
  }
  return "?";
}

inline CriterionKind parse_criterion(const std::string& name) {
  if (name == "pre") return CriterionKind::predictability;
  if (name == "por") return CriterionKind::portmanteau;
  if (name == "cro") return CriterionKind::crossing;
  if (name == "pcro") return CriterionKind::penalized_crossing;
  throw ValidationError("unknown criterion '" + name + "' (expected pre|por|cro|pcro)");
}

// Criterion weights (xi, zeta, eta) plus the lag-1 matrix H entering the
// first objective term. The four kinds fix the weights as:
//   pre:  xi=1, zeta=eta=0, H = M1 M0^-1 M1
//   por:  xi=0, zeta=eta=1, H unused (zero)
//   cro:  xi=1, zeta=eta=0, H = M1
//   pcro: xi=1, zeta=0, eta>0, H = M1
struct CriterionSpec {
  CriterionKind kind = CriterionKind::crossing;
  double xi = 0.0;
  double zeta = 0.0;
  double eta = 0.0;
  MatrixXd h_matrix;
  int lag_order = 0;
};

// Condition-number guard for inverting M_0 in the predictability criterion.
inline constexpr double kM0ConditionBound = 1e12;

// Estimates M_0..M_p from a spread series. Uses a single global sample mean
// and the 1/(T-i) normalization; each raw estimate is symmetrized before it
// is stored. A zero-variance spread column is recorded as a warning (M_0 is
// singular in that case) rather than an error.
inline LaggedMoments estimate_moments(const SpreadSeries& spreads, int lag_order) {
  if (lag_order < 1) throw ValidationError("lag order must be >= 1");
  const Eigen::Index t_count = spreads.periods();
  const Eigen::Index n = spreads.spreads();
  if (t_count <= lag_order + 1)
    throw ValidationError("need more than lag_order+1 samples, got " + std::to_string(t_count) +
                          " for p=" + std::to_string(lag_order));
  if (!is_finite(spreads.values)) throw ValidationError("non-finite spread value");

  const Eigen::RowVectorXd mean = spreads.values.colwise().mean();
  const MatrixXd centered = spreads.values.rowwise() - mean;

  LaggedMoments moments;
  moments.lag_order = lag_order;
  moments.m.reserve(static_cast<std::size_t>(lag_order) + 1);
  for (int lag = 0; lag <= lag_order; ++lag) {
    const Eigen::Index rows = t_count - lag;
    MatrixXd raw = centered.topRows(rows).transpose() * centered.bottomRows(rows) /
                   static_cast<double>(rows);
    moments.m.push_back(0.5 * (raw + raw.transpose()));
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    const double var = moments.m.front()(j, j);
    const double scale = 1.0 + mean(j) * mean(j);
    if (var <= 1e-28 * scale)
      moments.warnings.push_back("spread column " + std::to_string(j) +
                                 " has zero variance; M_0 is singular");
  }
  return moments;
}

// Assembles the criterion weights and H for the requested kind. `eta` is
// only consulted for the penalized-crossing criterion.
inline CriterionSpec build_criterion(const LaggedMoments& moments, CriterionKind kind,
                                     double eta = 0.0) {
  if (moments.m.size() < 2) throw ValidationError("moments must carry at least lags 0 and 1");
  const Eigen::Index n = moments.dim();
  const MatrixXd& m0 = moments.lag(0);
  const MatrixXd& m1 = moments.lag(1);

  CriterionSpec spec;
  spec.kind = kind;
  spec.lag_order = moments.lag_order;
  spec.h_matrix = MatrixXd::Zero(n, n);

  switch (kind) {
    case CriterionKind::predictability: {
      spec.xi = 1.0;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(m0);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      if (lo <= 0.0 || hi / lo > kM0ConditionBound)
        throw NumericalError(
            "M_0 numerically singular (condition " +
            std::to_string(lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()) +
            "); regularize the data or use the crossing criterion");
      const MatrixXd m0_inv_m1 = es.operatorInverseSqrt() * (es.operatorInverseSqrt() * m1);
      MatrixXd h = m1 * m0_inv_m1;
      spec.h_matrix = 0.5 * (h + h.transpose());
      break;
    }
    case CriterionKind::portmanteau:
      spec.zeta = 1.0;
      spec.eta = 1.0;
      break;
    case CriterionKind::crossing:
      spec.xi = 1.0;
      spec.h_matrix = m1;
      break;
    case CriterionKind::penalized_crossing:
      if (!(eta > 0.0)) throw ValidationError("penalized crossing requires eta > 0");
      spec.xi = 1.0;
      spec.eta = eta;
      spec.h_matrix = m1;
      break;
  }
  return spec;
}

// Throws unless the criterion was built for moments of the same shape.
inline void check_compatible(const CriterionSpec& spec, const LaggedMoments& moments) {
  if (spec.lag_order != moments.lag_order)
    throw ValidationError("criterion lag order " + std::to_string(spec.lag_order) +
                          " does not match moments lag order " +
                          std::to_string(moments.lag_order));
  if (spec.h_matrix.rows() != moments.dim())
    throw ValidationError("criterion dimension does not match moments dimension");
}

}  // namespace mrp
