#include <doctest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>

#include "mrp/backtest.hpp"
#include "mrp/market_data.hpp"
#include "mrp/moments.hpp"
#include "mrp/rng.hpp"
#include "mrp/sca_solver.hpp"
#include "mrp/serialize.hpp"
#include "mrp/sweep.hpp"
#include "mrp/synth.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

mrp::SolveReport sample_report() {
  mrp::Rng rng(801);
  const auto moments = oracle::random_moments(rng, 3, 2);
  const auto spec = mrp::build_criterion(moments, mrp::CriterionKind::penalized_crossing, 0.5);
  const auto basis = mrp::make_basis(MatrixXd::Identity(3, 3), 1.0);
  mrp::StepRule rule;
  return mrp::design_mrp(spec, moments, basis, 0.4, 0.05, rule, {});
}

}  // namespace

TEST_SUITE("serialize") {

TEST_CASE("solve report survives a JSON round trip bit-for-bit") {
  const auto report = sample_report();
  const auto dumped = mrp::solve_report_to_json(report).dump();
  const auto reparsed = mrp::solve_report_from_json(mrp::json::parse(dumped));
  CHECK(mrp::solve_report_to_json(reparsed).dump() == dumped);
  CHECK(reparsed.weights.w == report.weights.w);
  CHECK(reparsed.objective_trace == report.objective_trace);
}

TEST_CASE("backtest report survives a JSON round trip") {
  mrp::Rng rng(802);
  std::vector<double> path(120);
  path[0] = 0.0;
  for (std::size_t t = 1; t < path.size(); ++t) path[t] = path[t - 1] + 0.1 * rng.normal();
  mrp::AssetPanel panel;
  panel.log_prices = Eigen::Map<const VectorXd>(path.data(), 120);
  for (int t = 0; t < 120; ++t) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "d%04d", t);
    panel.dates.emplace_back(buf);
  }
  panel.tickers = {"A"};
  mrp::PortfolioWeights w;
  w.w = VectorXd::Ones(1);
  w.w_p = VectorXd::Ones(1);
  mrp::TradeConfig cfg;
  cfg.lookback = 15;
  const auto report = mrp::run_backtest(w, panel, mrp::make_basis(MatrixXd::Identity(1, 1), 1.0), cfg);

  const auto dumped = mrp::backtest_report_to_json(report).dump();
  const auto reparsed = mrp::backtest_report_from_json(mrp::json::parse(dumped));
  CHECK(mrp::backtest_report_to_json(reparsed).dump() == dumped);
  CHECK(reparsed.num_trades == report.num_trades);
}

TEST_CASE("moments dump round trips exactly") {
  mrp::Rng rng(803);
  const auto moments = oracle::random_moments(rng, 4, 3);
  const auto j = mrp::moments_to_json(moments);
  const auto reparsed = mrp::moments_from_json(mrp::json::parse(j.dump()));
  REQUIRE(reparsed.m.size() == moments.m.size());
  for (std::size_t i = 0; i < moments.m.size(); ++i) CHECK(reparsed.m[i] == moments.m[i]);
  CHECK(reparsed.lag_order == moments.lag_order);
}

TEST_CASE("csv artifacts are re-parseable with exact values") {
  mrp::Rng rng(804);
  const VectorXd w_p = oracle::random_vector(rng, 3);
  const auto weights_text = mrp::weights_csv({"AA", "BB", "CC"}, w_p);
  const auto wpath = temp_file("ser_weights.csv");
  mrp::atomic_write(wpath, weights_text);
  const auto rows = mrp::read_weights_csv(wpath.string());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].first == "AA");
  for (int i = 0; i < 3; ++i) CHECK(rows[static_cast<std::size_t>(i)].second == w_p[i]);

  std::vector<double> trace = {1.5, 1.25, 1.2499999999999998};
  const auto tpath = temp_file("ser_trace.csv");
  mrp::atomic_write(tpath, mrp::trace_csv(trace));
  CHECK(mrp::read_trace_csv(tpath.string()) == trace);

  std::vector<double> pnl = {0.0, 0.125, -0.25};
  const auto ppath = temp_file("ser_pnl.csv");
  mrp::atomic_write(ppath, mrp::cumulative_pnl_csv({"2020-01-01", "2020-01-02", "2020-01-03"}, pnl));
  const auto pnl_rows = mrp::read_cumulative_pnl_csv(ppath.string());
  REQUIRE(pnl_rows.size() == 3);
  CHECK(pnl_rows[2].second == -0.25);
  CHECK(pnl_rows[1].first == "2020-01-02");
}

TEST_CASE("tradeoff csv keeps failed rows and exact values") {
  std::vector<mrp::SweepRow> rows(2);
  rows[0].mu = 0.0;
  rows[0].ok = true;
  rows[0].u = 0.123456789012345678;
  rows[0].variance = 2.5;
  rows[0].l1_norm = 0.99999999999999989;
  rows[0].iterations = 17;
  rows[1].mu = 10.0;
  rows[1].ok = false;
  rows[1].error = "boom";
  const auto path = temp_file("ser_tradeoff.csv");
  mrp::atomic_write(path, mrp::tradeoff_csv(rows));
  const auto reparsed = mrp::read_tradeoff_csv(path.string());
  REQUIRE(reparsed.size() == 2);
  CHECK(reparsed[0].u == rows[0].u);
  CHECK(reparsed[0].l1_norm == rows[0].l1_norm);
  CHECK(reparsed[0].iterations == 17);
  CHECK_FALSE(reparsed[1].ok);
  CHECK(reparsed[1].mu == 10.0);
}

TEST_CASE("price and basis files round trip through their readers") {
  mrp::SynthConfig cfg;
  cfg.assets = 4;
  cfg.spreads = 2;
  cfg.periods = 50;
  cfg.seed = 99;
  const auto synth = mrp::generate_synthetic(cfg);

  const auto ppath = temp_file("ser_prices.csv");
  mrp::atomic_write(ppath, mrp::prices_csv(synth.panel.dates, synth.panel.tickers, synth.prices));
  const auto panel = mrp::load_panel(ppath.string());
  CHECK(panel.dates == synth.panel.dates);
  CHECK(panel.tickers == synth.panel.tickers);
  CHECK((panel.log_prices - synth.panel.log_prices).cwiseAbs().maxCoeff() <= 1e-14);

  const auto bpath = temp_file("ser_basis.csv");
  mrp::atomic_write(bpath, mrp::basis_csv(synth.true_basis));
  CHECK(mrp::load_basis_csv(bpath.string()) == synth.true_basis);
}

TEST_CASE("atomic writes leave no temp file behind") {
  const auto path = temp_file("ser_atomic.txt");
  mrp::atomic_write(path, "payload");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::ifstream in(path);
  std::string content;
  std::getline(in, content);
  CHECK(content == "payload");
}

}  // TEST_SUITE
