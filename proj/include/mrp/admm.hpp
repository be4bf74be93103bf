// admm.hpp
// Three-block ADMM for the inner convex subproblem
//   minimize  wᵀA w + bᵀw   subject to  ||B w||_1 <= L,
// split with z = Bw and scaled dual u:
//   w <- -(2A + rho BᵀB)^-1 (b + rho Bᵀ(u - z))
//   z <- project_l1(Bw + u, L)
//   u <- u + Bw - z
// The system matrix is factored once and reused across iterations; the
// factorization is refreshed only if rho adapts.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "mrp/common.hpp"
#include "mrp/l1_projection.hpp"
#include "mrp/market_data.hpp"

namespace mrp {

struct AdmmConfig {
  double rho = 1.0;        // penalty / dual step-size, > 0
  int max_iters = 10000;
  double primal_tol = 0.0;  // 0 resolves to 1e-8 * sqrt(N)
  double dual_tol = 0.0;    // 0 resolves to 1e-8 * sqrt(N)
  bool adapt_rho = false;   // residual balancing; off keeps runs reproducible
};

struct AdmmState {
  VectorXd w;  // primal, spread space
  VectorXd z;  // split variable, asset space; feasible after every update
  VectorXd u;  // scaled dual, asset space
  std::vector<double> primal_residuals;  // ||Bw - z|| per iteration
  std::vector<double> dual_residuals;    // rho ||Bᵀ(z_new - z_old)|| per iteration
  int iterations = 0;
  bool converged = false;
  double rho_final = 0.0;
};

inline double default_admm_tol(Eigen::Index n) {
  return 1e-8 * std::sqrt(static_cast<double>(n));
}

// Solves the subproblem; returns the final state (primal solution in .w).
// Hitting max_iters is reported through converged=false, not an exception.
inline AdmmState solve_subproblem(const MatrixXd& a, const VectorXd& b, const SpreadBasis& basis,
                                  const AdmmConfig& cfg, const AdmmState* warm = nullptr) {
  const Eigen::Index n = basis.spreads();
  const Eigen::Index m = basis.assets();
  if (a.rows() != n || a.cols() != n)
    throw ValidationError("quadratic term must be " + std::to_string(n) + "x" + std::to_string(n));
  if (b.size() != n) throw ValidationError("linear term length mismatch");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + a.cwiseAbs().maxCoeff()))
    throw ValidationError("quadratic term must be symmetric");
  if (!(cfg.rho > 0.0)) throw ValidationError("rho must be positive");
  if (cfg.max_iters < 1) throw ValidationError("max_iters must be positive");
  if (cfg.primal_tol < 0.0 || cfg.dual_tol < 0.0) throw ValidationError("tolerances must be >= 0");

  const double primal_tol = cfg.primal_tol > 0.0 ? cfg.primal_tol : default_admm_tol(n);
  const double dual_tol = cfg.dual_tol > 0.0 ? cfg.dual_tol : default_admm_tol(n);
  const MatrixXd& bmat = basis.basis;
  const MatrixXd btb = bmat.transpose() * bmat;

  double rho = cfg.rho;
  Eigen::LLT<MatrixXd> system;
  auto factorize = [&]() {
    system.compute(2.0 * a + rho * btb);
    if (system.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(2.0 * a + rho * btb);
      throw NumericalError("inner system 2A + rho BᵀB is not positive definite (lambda_min = " +
                           std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
  };
  factorize();

  AdmmState state;
  if (warm != nullptr) {
    if (warm->w.size() != n || warm->z.size() != m || warm->u.size() != m)
      throw ValidationError("warm-start state has wrong dimensions");
    state.w = warm->w;
    state.z = warm->z;
    state.u = warm->u;
  } else {
    state.w = VectorXd::Zero(n);
    state.z = VectorXd::Zero(m);
    state.u = VectorXd::Zero(m);
  }
  state.primal_residuals.reserve(64);
  state.dual_residuals.reserve(64);

  for (int k = 0; k < cfg.max_iters; ++k) {
    state.w = system.solve(-(b + rho * (bmat.transpose() * (state.u - state.z))));
    const VectorXd bw = bmat * state.w;
    const VectorXd z_new = project_l1(bw + state.u, basis.leverage_budget).z;
    const double dual_res = rho * (bmat.transpose() * (z_new - state.z)).norm();
    state.u += bw - z_new;
    state.z = z_new;
    const double primal_res = (bw - state.z).norm();
    state.primal_residuals.push_back(primal_res);
    state.dual_residuals.push_back(dual_res);
    state.iterations = k + 1;

    if (primal_res <= primal_tol && dual_res <= dual_tol) {
      state.converged = true;
      break;
    }
    if (cfg.adapt_rho) {
      if (primal_res > 10.0 * dual_res) {
        rho *= 2.0;
        state.u *= 0.5;
        factorize();
      } else if (dual_res > 10.0 * primal_res) {
        rho *= 0.5;
        state.u *= 2.0;
        factorize();
      }
    }
  }
  state.rho_final = rho;
  return state;
}

}  // namespace mrp
