#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mrp/criteria.hpp"
#include "mrp/moments.hpp"
#include "mrp/rng.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using mrp::CriterionKind;

namespace {

// Scalar-by-scalar reimplementation of U with explicit loops.
double loop_U(const VectorXd& w, const mrp::CriterionSpec& spec,
              const mrp::LaggedMoments& moments) {
  const auto n = w.size();
  auto quad = [&](const MatrixXd& mat) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) acc += w[i] * mat(i, j) * w[j];
    return acc;
  };
  const double q0 = quad(moments.lag(0));
  double value = spec.xi * quad(spec.h_matrix) / q0;
  const double r1 = quad(moments.lag(1)) / q0;
  value += spec.zeta * r1 * r1;
  for (int i = 2; i <= moments.lag_order; ++i) {
    const double ri = quad(moments.lag(i)) / q0;
    value += spec.eta * ri * ri;
  }
  return value;
}

mrp::LaggedMoments manual_moments(std::vector<MatrixXd> mats) {
  mrp::LaggedMoments moments;
  moments.lag_order = static_cast<int>(mats.size()) - 1;
  moments.m = std::move(mats);
  return moments;
}

mrp::CriterionSpec manual_spec(CriterionKind kind, double xi, double zeta, double eta,
                               MatrixXd h, int lag_order) {
  mrp::CriterionSpec spec;
  spec.kind = kind;
  spec.xi = xi;
  spec.zeta = zeta;
  spec.eta = eta;
  spec.h_matrix = std::move(h);
  spec.lag_order = lag_order;
  return spec;
}

}  // namespace

TEST_SUITE("criteria") {

TEST_CASE("Rayleigh quotient of a scaled identity is the scale") {
  const auto moments = manual_moments({MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 3)});
  const auto spec = manual_spec(CriterionKind::crossing, 1.0, 0.0, 0.0,
                                3.0 * MatrixXd::Identity(3, 3), 1);
  mrp::Rng rng(301);
  for (int rep = 0; rep < 5; ++rep) {
    VectorXd w = oracle::random_vector(rng, 3).normalized();
    CHECK(mrp::eval_U(w, spec, moments) == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("portmanteau value is zero when all lag moments vanish") {
  const auto moments = manual_moments(
      {MatrixXd::Identity(4, 4), MatrixXd::Zero(4, 4), MatrixXd::Zero(4, 4)});
  const auto spec =
      manual_spec(CriterionKind::portmanteau, 0.0, 1.0, 1.0, MatrixXd::Zero(4, 4), 2);
  mrp::Rng rng(302);
  const VectorXd w = oracle::random_vector(rng, 4);
  CHECK(mrp::eval_U(w, spec, moments) == 0.0);
}

TEST_CASE("penalized crossing matches the loop-based oracle") {
  mrp::Rng rng(303);
  for (int rep = 0; rep < 25; ++rep) {
    const auto moments = oracle::random_moments(rng, 4, 3);
    const auto spec = mrp::build_criterion(moments, CriterionKind::penalized_crossing, 0.5);
    const VectorXd w = oracle::random_vector(rng, 4);
    const double expected = loop_U(w, spec, moments);
    CHECK(mrp::eval_U(w, spec, moments) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("variance term is the reciprocal quadratic form") {
  const auto moments = manual_moments({MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2)});
  VectorXd w(2);
  w << 2.0, 0.0;  // wᵀM₀w = 4
  CHECK(mrp::eval_V(w, moments) == 0.25);
  w << 1.0, 0.0;
  CHECK(mrp::eval_V(w, moments) == 1.0);
  w << 0.6, -0.3;
  const double v1 = mrp::eval_V(w, moments);
  const double v2 = mrp::eval_V(2.0 * w, moments);
  CHECK(v2 == doctest::Approx(v1 / 4.0).epsilon(1e-14));
}

TEST_CASE("degenerate denominator raises a numerical error") {
  MatrixXd m0 = MatrixXd::Zero(2, 2);
  m0(0, 0) = 1.0;
  const auto moments = manual_moments({m0, MatrixXd::Zero(2, 2)});
  VectorXd w(2);
  w << 0.0, 1.0;  // null space of M_0
  CHECK_THROWS_AS(mrp::eval_V(w, moments), mrp::NumericalError);
}

TEST_CASE("objective composes U and V") {
  // q0 = 2 so v = 0.5; H = M1 = 0.4 so u = 0.4/2 = 0.2.
  const auto moments = manual_moments({MatrixXd::Constant(1, 1, 2.0), MatrixXd::Constant(1, 1, 0.4)});
  const auto spec = mrp::build_criterion(moments, CriterionKind::crossing);
  VectorXd w(1);
  w << 1.0;
  const auto at_zero = mrp::eval_F(w, spec, moments, 0.0);
  CHECK(at_zero.f == at_zero.u);
  const auto at_one = mrp::eval_F(w, spec, moments, 1.0);
  CHECK(at_one.u == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(at_one.v == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(at_one.f == doctest::Approx(0.7).epsilon(1e-14));
  CHECK_THROWS_AS(mrp::eval_F(w, spec, moments, -0.1), mrp::ValidationError);
}

TEST_CASE("huge mu makes the objective rank by variance alone") {
  mrp::Rng rng(304);
  const auto moments = oracle::random_moments(rng, 3, 2);
  const auto spec = mrp::build_criterion(moments, CriterionKind::crossing);
  std::vector<VectorXd> points;
  for (int i = 0; i < 100; ++i) points.push_back(oracle::random_vector(rng, 3));

  auto rank_by = [&](auto value) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return value(points[a]) < value(points[b]); });
    return order;
  };
  const auto by_f = rank_by(
      [&](const VectorXd& w) { return mrp::eval_F(w, spec, moments, 1e6).f; });
  const auto by_v = rank_by([&](const VectorXd& w) { return mrp::eval_V(w, moments); });
  CHECK(by_f == by_v);
}

TEST_CASE("gradient of the variance term at a unit vector") {
  const auto moments = manual_moments({MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 3)});
  const auto spec =
      manual_spec(CriterionKind::crossing, 1.0, 0.0, 0.0, MatrixXd::Zero(3, 3), 1);
  VectorXd w(3);
  w << 1.0, 0.0, 0.0;
  const VectorXd grad = mrp::grad_F(w, spec, moments, 1.0);
  CHECK(grad[0] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(grad[1] == 0.0);
  CHECK(grad[2] == 0.0);
}

TEST_CASE("analytic gradient matches central differences for all criteria") {
  mrp::Rng rng(305);
  for (int rep = 0; rep < 10; ++rep) {
    const auto moments = oracle::random_moments(rng, 5, 3);
    for (CriterionKind kind : {CriterionKind::predictability, CriterionKind::portmanteau,
                               CriterionKind::crossing, CriterionKind::penalized_crossing}) {
      const auto spec = mrp::build_criterion(moments, kind, 0.5);
      const double mu = rng.uniform(0.0, 2.0);
      const VectorXd w = oracle::random_vector(rng, 5).normalized();
      const VectorXd analytic = mrp::grad_F(w, spec, moments, mu);
      const VectorXd numeric = oracle::fd_gradient(
          [&](const VectorXd& x) { return mrp::eval_F(x, spec, moments, mu).f; }, w);
      const double denom = std::max(1.0, analytic.norm());
      CHECK((analytic - numeric).norm() / denom <= 1e-6);
    }
  }
}

TEST_CASE("U is scale invariant and its gradient is orthogonal to w") {
  mrp::Rng rng(306);
  for (int rep = 0; rep < 10; ++rep) {
    const auto moments = oracle::random_moments(rng, 4, 3);
    for (CriterionKind kind : {CriterionKind::predictability, CriterionKind::portmanteau,
                               CriterionKind::crossing, CriterionKind::penalized_crossing}) {
      const auto spec = mrp::build_criterion(moments, kind, 0.7);
      const VectorXd w = oracle::random_vector(rng, 4);
      const double base = mrp::eval_U(w, spec, moments);
      for (double alpha : {-3.0, 0.1, 7.0}) {
        const double scaled = mrp::eval_U(alpha * w, spec, moments);
        CHECK(scaled == doctest::Approx(base).epsilon(1e-10));
      }
      // Euler relation for the 0-homogeneous U, checked at 2w.
      const VectorXd grad = mrp::grad_F(2.0 * w, spec, moments, 0.0);
      const double scale = std::max(1.0, grad.norm() * w.norm());
      CHECK(std::abs(grad.dot(2.0 * w)) / scale <= 1e-10);
    }
  }
}

TEST_CASE("U is nonnegative for predictability and portmanteau") {
  mrp::Rng rng(307);
  for (int rep = 0; rep < 10; ++rep) {
    const auto moments = oracle::random_moments(rng, 4, 2);
    for (CriterionKind kind : {CriterionKind::predictability, CriterionKind::portmanteau}) {
      const auto spec = mrp::build_criterion(moments, kind);
      const VectorXd w = oracle::random_vector(rng, 4);
      CHECK(mrp::eval_U(w, spec, moments) >= -1e-12);
    }
  }
}

}  // TEST_SUITE
