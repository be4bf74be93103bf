// sca_solver.hpp
// Outer successive-convex-approximation loop for the portfolio design
// problem: at each iterate build the quadratic surrogate, solve the
// leverage-constrained subproblem with ADMM, and move along the resulting
// direction with a constant, diminishing, or Armijo-backtracking step.
// Every iterate stays feasible: the start point is feasible, the subproblem
// solution is feasible, and steps are convex combinations of the two.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mrp/admm.hpp"
#include "mrp/common.hpp"
#include "mrp/criteria.hpp"
#include "mrp/market_data.hpp"
#include "mrp/moments.hpp"
#include "mrp/surrogate.hpp"

namespace mrp {

enum class StepRuleKind { constant, diminishing, armijo };

inline std::string to_string(StepRuleKind kind) {
  switch (kind) {
    case StepRuleKind::constant: return "constant";
    case StepRuleKind::diminishing: return "diminishing";
    case StepRuleKind::armijo: return "armijo";
  }
  return "?";
}

inline StepRuleKind parse_step_rule(const std::string& name) {
  if (name == "constant") return StepRuleKind::constant;
  if (name == "diminishing") return StepRuleKind::diminishing;
  if (name == "armijo") return StepRuleKind::armijo;
  throw ValidationError("unknown step rule '" + name + "'");
}

struct StepRule {
  StepRuleKind kind = StepRuleKind::armijo;
  double gamma0 = 1.0;  // initial step, in (0, 1]
  double theta = 0.5;   // diminishing contraction, in (0, 1)
  double alpha = 0.1;   // Armijo sufficient-decrease weight, in (0, 1)
  double beta = 0.5;    // Armijo backtracking factor, in (0, 1)
};

inline void validate_step_rule(const StepRule& rule) {
  if (!(rule.gamma0 > 0.0 && rule.gamma0 <= 1.0))
    throw ValidationError("gamma0 must be in (0, 1]");
  if (rule.kind == StepRuleKind::diminishing && !(rule.theta > 0.0 && rule.theta < 1.0))
    throw ValidationError("theta must be in (0, 1)");
  if (rule.kind == StepRuleKind::armijo) {
    if (!(rule.alpha > 0.0 && rule.alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
    if (!(rule.beta > 0.0 && rule.beta < 1.0)) throw ValidationError("beta must be in (0, 1)");
  }
}

// One update of the diminishing schedule: gamma <- gamma * (1 - theta*gamma).
// Stays in (0, gamma) for valid inputs; the sequence decays like 2/(theta*k).
inline double step_diminishing(double gamma, double theta) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must be in (0, 1]");
  if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("theta must be in (0, 1)");
  return gamma * (1.0 - theta * gamma);
}

inline constexpr int kArmijoMaxBacktracks = 60;

struct ArmijoResult {
  double gamma = 1.0;
  int backtracks = 0;
  bool accepted = false;  // false means the cap was hit without decrease
};

// Backtracking line search: accept gamma = beta^l once
//   F(w + gamma*d) - F(w) <= -alpha * gamma * ||d||².
// Capped at l = 60; a capped search returns beta^60 with accepted=false so
// the caller can fall back to another rule.
inline ArmijoResult step_armijo(const VectorXd& w, const VectorXd& direction,
                                const std::function<double(const VectorXd&)>& objective,
                                double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("beta must be in (0, 1)");
  const double dir_sq = direction.squaredNorm();
  if (dir_sq == 0.0) throw ValidationError("Armijo search direction is zero");

  const double f0 = objective(w);
  ArmijoResult result;
  double gamma = 1.0;
  for (int l = 0; l <= kArmijoMaxBacktracks; ++l) {
    if (objective(w + gamma * direction) - f0 <= -alpha * gamma * dir_sq) {
      result.gamma = gamma;
      result.backtracks = l;
      result.accepted = true;
      return result;
    }
    gamma *= beta;
  }
  result.gamma = gamma / beta;  // beta^60
  result.backtracks = kArmijoMaxBacktracks;
  result.accepted = false;
  return result;
}

struct SolverOptions {
  int max_outer_iters = 500;
  double rel_objective_tol = 1e-8;  // |F_{k+1} - F_k| <= tol*max(1,|F|)
  int consecutive_hits = 3;         // objective stalls needed to declare convergence
  double stationarity_tol = 1e-5;   // ||w_hat - w|| <= tol*max(1,||w||)
};

struct SolveReport {
  PortfolioWeights weights;
  ObjectiveValue objective;
  std::vector<double> objective_trace;    // F(w_k), k = 0.. (includes start)
  std::vector<double> gamma_trace;        // step used at each outer iteration
  std::vector<double> feasibility_trace;  // ||B w_k||_1 per iterate
  std::vector<int> inner_iters;           // ADMM iterations per outer step
  int outer_iters = 0;
  bool converged = false;
  std::string reason;
  double feasibility_gap = 0.0;  // ||B w||_1 - L at exit
  std::vector<std::string> warnings;
};

// Deterministic default start: the top-variance eigenvector of M_0, sign
// pinned, rescaled so the asset-space l1 norm sits at half the budget.
inline VectorXd default_seed_weights(const LaggedMoments& moments, const SpreadBasis& basis) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(moments.lag(0));
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of M_0 failed");
  VectorXd v = es.eigenvectors().col(moments.dim() - 1);
  Eigen::Index max_idx = 0;
  v.cwiseAbs().maxCoeff(&max_idx);
  if (v[max_idx] < 0.0) v = -v;
  const double norm1 = (basis.basis * v).lpNorm<1>();
  if (!(norm1 > 0.0)) throw NumericalError("degenerate seed direction");
  return v * (0.5 * basis.leverage_budget / norm1);
}

// Runs the full design loop. Throws ValidationError for an infeasible start
// and NumericalError (with the objective trace in the message) if an iterate
// degenerates; an exhausted iteration budget is reported in the result.
inline SolveReport design_mrp(const CriterionSpec& spec, const LaggedMoments& moments,
                              const SpreadBasis& basis, double mu, double tau,
                              const StepRule& step, const AdmmConfig& inner,
                              const std::optional<VectorXd>& w0 = std::nullopt,
                              const SolverOptions& options = {}) {
  if (!(mu >= 0.0)) throw ValidationError("mu must be nonnegative");
  if (!(tau >= 0.0)) throw ValidationError("tau must be nonnegative");
  check_compatible(spec, moments);
  if (basis.spreads() != moments.dim())
    throw ValidationError("basis spread count does not match moments dimension");
  validate_step_rule(step);

  SolveReport report;
  if (tau == 0.0)
    report.warnings.push_back("tau = 0: surrogate is only weakly convex");

  const double budget = basis.leverage_budget;
  VectorXd w = w0.has_value() ? *w0 : default_seed_weights(moments, basis);
  if (w.size() != basis.spreads()) throw ValidationError("w0 length mismatch");
  const double start_norm = (basis.basis * w).lpNorm<1>();
  if (start_norm > budget * (1.0 + 1e-12))
    throw ValidationError("w0 infeasible: ||B w0||_1 = " + std::to_string(start_norm) +
                          " exceeds budget " + std::to_string(budget));

  auto objective = [&](const VectorXd& x) { return eval_F(x, spec, moments, mu).f; };
  // For line-search trials only: a degenerate trial point reads as +inf so
  // the search backtracks toward the (non-degenerate) current iterate.
  auto objective_or_inf = [&](const VectorXd& x) {
    try {
      return eval_F(x, spec, moments, mu).f;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  auto degenerate_error = [&](int iter) {
    std::string msg = "iterate " + std::to_string(iter) + " degenerate (wᵀM₀w ~ 0); trace:";
    for (double f : report.objective_trace) msg += " " + std::to_string(f);
    return NumericalError(msg);
  };

  double f_current = 0.0;
  try {
    f_current = objective(w);
  } catch (const NumericalError&) {
    throw ValidationError("w0 lies in the null space of M_0");
  }
  report.objective_trace.push_back(f_current);
  report.feasibility_trace.push_back(start_norm);

  double gamma_schedule = step.gamma0;
  int stall_count = 0;
  AdmmState inner_state;
  bool have_warm = false;
  double last_direction_norm = 1.0;

  // The ratio terms and the variance term enter the surrogate only through
  // their linearizations, so the proximal weight is the sole curvature
  // standing in for them. Set it from the exact Hessian of those remainder
  // terms at the anchor; with it the subproblem step behaves like a
  // well-scaled projected-gradient step instead of a far-overshooting jump
  // the line search then cuts to nothing.
  const MatrixXd& m0 = moments.lag(0);
  auto ratio_hessian = [&](const MatrixXd& mat, const VectorXd& x, double q0,
                           const VectorXd& m0x) {
    const VectorXd mx = mat * x;
    const double ratio = x.dot(mx) / q0;
    MatrixXd hess = 2.0 * (mat - ratio * m0) / q0;
    hess -= (4.0 / (q0 * q0)) * (mx * m0x.transpose() + m0x * mx.transpose());
    hess += (8.0 * ratio / (q0 * q0)) * m0x * m0x.transpose();
    return hess;
  };
  auto proximal_weight = [&](const VectorXd& x) {
    const double q0 = x.dot(m0 * x);
    const VectorXd m0x = m0 * x;
    MatrixXd remainder = MatrixXd::Zero(x.size(), x.size());
    if (spec.xi != 0.0) remainder += spec.xi * ratio_hessian(spec.h_matrix, x, q0, m0x);
    for (int i = 1; i <= moments.lag_order; ++i) {
      const double weight = (i == 1) ? spec.zeta : spec.eta;
      if (weight == 0.0) continue;
      const double ri = x.dot(moments.lag(i) * x) / q0;
      remainder += 2.0 * weight * ri * ratio_hessian(moments.lag(i), x, q0, m0x);
    }
    if (mu != 0.0)
      remainder += mu * (8.0 / (q0 * q0 * q0) * m0x * m0x.transpose() - 2.0 / (q0 * q0) * m0);
    const double gain = Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (remainder + remainder.transpose()))
                            .eigenvalues()
                            .cwiseAbs()
                            .maxCoeff();
    return tau + 0.5 * gain;
  };

  for (int k = 0; k < options.max_outer_iters; ++k) {
    report.outer_iters = k + 1;
    QuadraticModel model;
    try {
      model = build_surrogate(w, spec, moments, mu, proximal_weight(w));
    } catch (const NumericalError&) {
      throw degenerate_error(k);
    }

    // Tighten the inner solve as the outer loop settles; a loose inner
    // solution is enough while the anchor is still moving a lot.
    AdmmConfig inner_cfg = inner;
    const double tol_scale = std::clamp(last_direction_norm, 1e-4, 1.0);
    inner_cfg.primal_tol =
        (inner.primal_tol > 0.0 ? inner.primal_tol : default_admm_tol(basis.spreads())) * tol_scale;
    inner_cfg.dual_tol =
        (inner.dual_tol > 0.0 ? inner.dual_tol : default_admm_tol(basis.spreads())) * tol_scale;

    // Normalize the subproblem objective to unit curvature scale. The argmin
    // is unchanged and the ADMM penalty stays commensurate with the
    // quadratic whatever the proximal weight grew to.
    const double objective_scale =
        std::max(model.a.norm() / std::sqrt(static_cast<double>(basis.spreads())), 1e-300);

    inner_state = solve_subproblem(model.a / objective_scale, model.b / objective_scale, basis,
                                   inner_cfg, have_warm ? &inner_state : nullptr);
    have_warm = true;
    report.inner_iters.push_back(inner_state.iterations);
    if (!inner_state.converged)
      report.warnings.push_back("inner solve hit max_iters at outer iteration " +
                                std::to_string(k));

    // The inner solve is feasible only up to its residual tolerance; pull an
    // overshoot back onto the ball so convex steps keep every iterate inside.
    VectorXd subproblem_point = inner_state.w;
    const double subproblem_norm = (basis.basis * subproblem_point).lpNorm<1>();
    if (subproblem_norm > budget) subproblem_point *= budget / subproblem_norm;

    const VectorXd direction = subproblem_point - w;
    const double dir_norm = direction.norm();
    last_direction_norm = dir_norm;
    if (dir_norm <= options.stationarity_tol * std::max(1.0, w.norm())) {
      report.converged = true;
      report.reason = "stationary: subproblem solution matches iterate";
      break;
    }

    double gamma = 0.0;
    switch (step.kind) {
      case StepRuleKind::constant:
        gamma = step.gamma0;
        break;
      case StepRuleKind::diminishing:
        gamma = gamma_schedule;
        gamma_schedule = step_diminishing(gamma_schedule, step.theta);
        break;
      case StepRuleKind::armijo: {
        const ArmijoResult armijo =
            step_armijo(w, direction, objective_or_inf, step.alpha, step.beta);
        if (!armijo.accepted) {
          // No step with sufficient decrease; accept only a plain decrease,
          // otherwise stop rather than break monotonicity.
          if (objective_or_inf(w + armijo.gamma * direction) >= f_current) {
            report.converged = false;
            report.reason = "line search stalled without decrease";
            report.warnings.push_back("Armijo cap hit at outer iteration " + std::to_string(k));
            gamma = 0.0;
          } else {
            gamma = armijo.gamma;
            report.warnings.push_back("Armijo cap hit at outer iteration " + std::to_string(k) +
                                      "; took smallest step");
          }
        } else {
          gamma = armijo.gamma;
        }
        break;
      }
    }
    if (gamma == 0.0) break;

    w += gamma * direction;
    double f_next = 0.0;
    try {
      f_next = objective(w);
    } catch (const NumericalError&) {
      throw degenerate_error(k + 1);
    }
    report.gamma_trace.push_back(gamma);
    report.objective_trace.push_back(f_next);
    report.feasibility_trace.push_back((basis.basis * w).lpNorm<1>());

    if (std::abs(f_next - f_current) <= options.rel_objective_tol * std::max(1.0, std::abs(f_next)))
      ++stall_count;
    else
      stall_count = 0;
    f_current = f_next;
    if (stall_count >= options.consecutive_hits) {
      report.converged = true;
      report.reason = "objective change below tolerance for " +
                      std::to_string(options.consecutive_hits) + " iterations";
      break;
    }
  }

  if (!report.converged && report.reason.empty())
    report.reason = "iteration cap reached";

  report.weights.w = w;
  report.weights.w_p = basis.basis * w;
  report.objective = eval_F(w, spec, moments, mu);
  report.feasibility_gap = report.weights.w_p.lpNorm<1>() - budget;
  return report;
}

}  // namespace mrp
