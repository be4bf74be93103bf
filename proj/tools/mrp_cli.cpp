// mrp_cli.cpp
// Command-line front end: synthetic data generation, moment estimation,
// portfolio design, mu sweeps, and backtesting. All outputs are plain data
// files (CSV/JSON) written atomically into the --out directory.
//
// Exit codes: 0 success, 2 validation, 3 I/O, 4 numerical.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrp/admm.hpp"
#include "mrp/backtest.hpp"
#include "mrp/common.hpp"
#include "mrp/market_data.hpp"
#include "mrp/moments.hpp"
#include "mrp/sca_solver.hpp"
#include "mrp/serialize.hpp"
#include "mrp/surrogate.hpp"
#include "mrp/sweep.hpp"
#include "mrp/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

using mrp::json;

struct RunConfig {
  std::string prices_path;
  std::string basis_path;
  std::string report_path;  // backtest input
  std::string out_dir = ".";

  std::string criterion = "pcro";
  double eta = 0.5;
  int lag_order = 3;
  std::vector<double> mu_grid = {1.0};
  double tau = -1.0;  // negative resolves to the data-scaled default
  double leverage = 1.0;

  mrp::StepRule step;
  mrp::AdmmConfig admm;
  mrp::SolverOptions solver;
  mrp::TradeConfig backtest;
  mrp::SynthConfig synth;

  std::uint64_t seed = 42;
  unsigned workers = 0;
  bool verbose = false;
};

void apply_json(RunConfig& cfg, const json& j) {
  if (j.contains("prices")) cfg.prices_path = j.at("prices").get<std::string>();
  if (j.contains("basis")) cfg.basis_path = j.at("basis").get<std::string>();
  if (j.contains("report")) cfg.report_path = j.at("report").get<std::string>();
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  if (j.contains("criterion")) cfg.criterion = j.at("criterion").get<std::string>();
  if (j.contains("eta")) cfg.eta = j.at("eta").get<double>();
  if (j.contains("lag_order")) cfg.lag_order = j.at("lag_order").get<int>();
  if (j.contains("mu")) {
    if (j.at("mu").is_array())
      cfg.mu_grid = j.at("mu").get<std::vector<double>>();
    else
      cfg.mu_grid = {j.at("mu").get<double>()};
  }
  if (j.contains("tau") && !j.at("tau").is_null()) cfg.tau = j.at("tau").get<double>();
  if (j.contains("leverage")) cfg.leverage = j.at("leverage").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("workers")) cfg.workers = j.at("workers").get<unsigned>();

  if (j.contains("step")) {
    const auto& s = j.at("step");
    if (s.contains("kind")) cfg.step.kind = mrp::parse_step_rule(s.at("kind").get<std::string>());
    if (s.contains("gamma0")) cfg.step.gamma0 = s.at("gamma0").get<double>();
    if (s.contains("theta")) cfg.step.theta = s.at("theta").get<double>();
    if (s.contains("alpha")) cfg.step.alpha = s.at("alpha").get<double>();
    if (s.contains("beta")) cfg.step.beta = s.at("beta").get<double>();
  }
  if (j.contains("admm")) {
    const auto& a = j.at("admm");
    if (a.contains("rho")) cfg.admm.rho = a.at("rho").get<double>();
    if (a.contains("max_iters")) cfg.admm.max_iters = a.at("max_iters").get<int>();
    if (a.contains("primal_tol")) cfg.admm.primal_tol = a.at("primal_tol").get<double>();
    if (a.contains("dual_tol")) cfg.admm.dual_tol = a.at("dual_tol").get<double>();
    if (a.contains("adapt_rho")) cfg.admm.adapt_rho = a.at("adapt_rho").get<bool>();
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("max_outer_iters")) cfg.solver.max_outer_iters = s.at("max_outer_iters").get<int>();
  }
  if (j.contains("backtest")) {
    const auto& b = j.at("backtest");
    if (b.contains("open_threshold")) cfg.backtest.open_threshold = b.at("open_threshold").get<double>();
    if (b.contains("close_threshold")) cfg.backtest.close_threshold = b.at("close_threshold").get<double>();
    if (b.contains("lookback")) cfg.backtest.lookback = b.at("lookback").get<int>();
    if (b.contains("annualization")) cfg.backtest.annualization = b.at("annualization").get<double>();
  }
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    if (s.contains("assets")) cfg.synth.assets = s.at("assets").get<int>();
    if (s.contains("spreads")) cfg.synth.spreads = s.at("spreads").get<int>();
    if (s.contains("periods")) cfg.synth.periods = s.at("periods").get<int>();
    if (s.contains("ar_coeff")) cfg.synth.ar_coeff = s.at("ar_coeff").get<double>();
    if (s.contains("ar_coeffs")) cfg.synth.ar_coeffs = s.at("ar_coeffs").get<std::vector<double>>();
    if (s.contains("spread_vol")) cfg.synth.spread_vol = s.at("spread_vol").get<double>();
    if (s.contains("walk_vol")) cfg.synth.walk_vol = s.at("walk_vol").get<double>();
  }
}

RunConfig load_config(const std::string& config_path) {
  RunConfig cfg;
  if (config_path.empty()) return cfg;
  std::ifstream in(config_path);
  if (!in) throw mrp::IoError("cannot open config file: " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw mrp::ValidationError("config parse error in " + config_path + ": " + e.what());
  }
  apply_json(cfg, j);
  return cfg;
}

std::vector<double> parse_mu_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw mrp::ValidationError("bad mu value '" + cell + "'");
    }
  }
  if (values.empty()) throw mrp::ValidationError("empty mu list");
  return values;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw mrp::ValidationError("missing required " + what + " path");
  if (!std::filesystem::exists(path)) throw mrp::IoError(what + " file not found: " + path);
}

void validate_common(const RunConfig& cfg) {
  for (double mu : cfg.mu_grid)
    if (!(mu >= 0.0)) throw mrp::ValidationError("mu must be nonnegative");
  if (!(cfg.leverage > 0.0)) throw mrp::ValidationError("leverage must be positive");
  if (cfg.lag_order < 1) throw mrp::ValidationError("lag_order must be >= 1");
  mrp::parse_criterion(cfg.criterion);
  mrp::validate_step_rule(cfg.step);
}

std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw mrp::IoError("cannot create output directory " + dir.string());
  return dir;
}

struct LoadedProblem {
  mrp::AssetPanel panel;
  mrp::SpreadBasis basis;
  mrp::LaggedMoments moments;
  mrp::CriterionSpec spec;
  double tau;
};

LoadedProblem load_problem(const RunConfig& cfg) {
  require_file(cfg.prices_path, "prices");
  require_file(cfg.basis_path, "basis");
  LoadedProblem p;
  p.panel = mrp::load_panel(cfg.prices_path);
  p.basis = mrp::make_basis(mrp::load_basis_csv(cfg.basis_path), cfg.leverage);
  const auto spreads = mrp::build_spreads(p.panel, p.basis);
  p.moments = mrp::estimate_moments(spreads, cfg.lag_order);
  p.spec = mrp::build_criterion(p.moments, mrp::parse_criterion(cfg.criterion), cfg.eta);
  p.tau = cfg.tau >= 0.0 ? cfg.tau : mrp::default_tau(p.moments);
  return p;
}

int cmd_synth(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.synth.seed = cfg.seed;
  const auto out = ensure_out_dir(cfg);
  const auto result = mrp::generate_synthetic(cfg.synth);
  mrp::atomic_write(out / "prices.csv",
                    mrp::prices_csv(result.panel.dates, result.panel.tickers, result.prices));
  mrp::atomic_write(out / "basis.csv", mrp::basis_csv(result.true_basis));
  if (cfg.verbose)
    std::cout << "synth: wrote " << (out / "prices.csv").string() << " ("
              << result.panel.periods() << "x" << result.panel.assets() << ") and "
              << (out / "basis.csv").string() << "\n";
  return kExitOk;
}

int cmd_moments(const RunConfig& cfg) {
  const auto out = ensure_out_dir(cfg);
  require_file(cfg.prices_path, "prices");
  require_file(cfg.basis_path, "basis");
  const auto panel = mrp::load_panel(cfg.prices_path);
  const auto basis = mrp::make_basis(mrp::load_basis_csv(cfg.basis_path), cfg.leverage);
  const auto moments = mrp::estimate_moments(mrp::build_spreads(panel, basis), cfg.lag_order);
  mrp::atomic_write(out / "moments.json", mrp::moments_to_json(moments).dump(2) + "\n");
  if (cfg.verbose) std::cout << "moments: wrote " << (out / "moments.json").string() << "\n";
  return kExitOk;
}

int cmd_design(const RunConfig& cfg) {
  if (cfg.mu_grid.size() != 1)
    throw mrp::ValidationError("design expects a single mu (use sweep for grids)");
  const auto out = ensure_out_dir(cfg);
  const auto problem = load_problem(cfg);
  const auto report = mrp::design_mrp(problem.spec, problem.moments, problem.basis,
                                      cfg.mu_grid.front(), problem.tau, cfg.step, cfg.admm,
                                      std::nullopt, cfg.solver);
  mrp::atomic_write(out / "solve_report.json", mrp::solve_report_to_json(report).dump(2) + "\n");
  mrp::atomic_write(out / "weights.csv",
                    mrp::weights_csv(problem.panel.tickers, report.weights.w_p));
  mrp::atomic_write(out / "objective_trace.csv", mrp::trace_csv(report.objective_trace));
  if (cfg.verbose) {
    std::cout << "design: " << (report.converged ? "converged" : "not converged") << " ("
              << report.reason << ") after " << report.outer_iters
              << " iterations, F = " << report.objective.f << "\n";
    for (const auto& warning : report.warnings) std::cout << "  warning: " << warning << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.mu_grid.empty()) throw mrp::ValidationError("sweep needs a nonempty mu grid");
  const auto out = ensure_out_dir(cfg);
  const auto problem = load_problem(cfg);
  const auto rows = mrp::run_sweep(problem.spec, problem.moments, problem.basis, cfg.mu_grid,
                                   problem.tau, cfg.step, cfg.admm, cfg.workers, cfg.solver);
  mrp::atomic_write(out / "tradeoff.csv", mrp::tradeoff_csv(rows));
  if (cfg.verbose)
    for (const auto& row : rows)
      std::cout << "sweep: mu=" << row.mu << " "
                << (row.ok ? "ok" : std::string("failed: ") + row.error) << "\n";
  return kExitOk;
}

int cmd_backtest(const RunConfig& cfg) {
  const auto out = ensure_out_dir(cfg);
  require_file(cfg.prices_path, "prices");
  require_file(cfg.basis_path, "basis");
  require_file(cfg.report_path, "solve report");
  const auto panel = mrp::load_panel(cfg.prices_path);
  const auto basis = mrp::make_basis(mrp::load_basis_csv(cfg.basis_path), cfg.leverage);

  std::ifstream in(cfg.report_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw mrp::ValidationError("report parse error in " + cfg.report_path + ": " + e.what());
  }
  const auto solve_report = mrp::solve_report_from_json(j);

  const auto weights = mrp::make_weights(solve_report.weights.w, basis);
  const auto report = mrp::run_backtest(weights, panel, basis, cfg.backtest);
  mrp::atomic_write(out / "backtest_report.json",
                    mrp::backtest_report_to_json(report).dump(2) + "\n");
  mrp::atomic_write(out / "cumulative_pnl.csv",
                    mrp::cumulative_pnl_csv(panel.dates, report.cumulative_pnl));
  if (cfg.verbose)
    std::cout << "backtest: " << report.num_trades << " trades, roi = " << report.roi
              << ", sharpe = " << report.sharpe.value
              << (report.sharpe.degenerate ? " (degenerate)" : "") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-reverting portfolio design and evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string prices_path, basis_path, report_path, out_dir, criterion, mu_text, step_kind;
  std::optional<double> eta, leverage, tau;
  std::optional<int> lag_order;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool verbose = false;

  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--prices", prices_path, "prices CSV (date,<ticker>,... )");
  app.add_option("--basis", basis_path, "basis CSV (M rows x N columns)");
  app.add_option("--report", report_path, "solve_report.json from a design run");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--criterion", criterion, "pre|por|cro|pcro");
  app.add_option("--mu", mu_text, "trade-off weight, or comma list for sweep");
  app.add_option("--eta", eta, "penalized-crossing weight");
  app.add_option("--lag", lag_order, "moment lag order p");
  app.add_option("--leverage", leverage, "gross leverage budget L");
  app.add_option("--tau", tau, "surrogate proximal weight (default: data-scaled)");
  app.add_option("--step", step_kind, "constant|diminishing|armijo");
  app.add_option("--seed", seed, "random seed for synth");
  app.add_option("--workers", workers, "sweep worker cap (0 = hardware)");
  app.add_flag("--verbose", verbose, "print progress");

  auto* sub_synth = app.add_subcommand("synth", "generate a synthetic cointegrated fixture");
  auto* sub_moments = app.add_subcommand("moments", "estimate lagged moments and dump JSON");
  auto* sub_design = app.add_subcommand("design", "solve the portfolio design problem");
  auto* sub_sweep = app.add_subcommand("sweep", "solve across a mu grid");
  auto* sub_backtest = app.add_subcommand("backtest", "trade a designed portfolio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!prices_path.empty()) cfg.prices_path = prices_path;
    if (!basis_path.empty()) cfg.basis_path = basis_path;
    if (!report_path.empty()) cfg.report_path = report_path;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!criterion.empty()) cfg.criterion = criterion;
    if (!mu_text.empty()) cfg.mu_grid = parse_mu_list(mu_text);
    if (eta) cfg.eta = *eta;
    if (lag_order) cfg.lag_order = *lag_order;
    if (leverage) cfg.leverage = *leverage;
    if (tau) cfg.tau = *tau;
    if (!step_kind.empty()) cfg.step.kind = mrp::parse_step_rule(step_kind);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    cfg.verbose = cfg.verbose || verbose;
    validate_common(cfg);

    if (sub_synth->parsed()) return cmd_synth(cfg);
    if (sub_moments->parsed()) return cmd_moments(cfg);
    if (sub_design->parsed()) return cmd_design(cfg);
    if (sub_sweep->parsed()) return cmd_sweep(cfg);
    if (sub_backtest->parsed()) return cmd_backtest(cfg);
    throw mrp::ValidationError("no subcommand given");
  } catch (const mrp::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const mrp::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const mrp::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
