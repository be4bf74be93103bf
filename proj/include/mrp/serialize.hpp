// serialize.hpp
// JSON and CSV readers/writers for every file the toolkit produces, plus
// atomic file writes (temp + rename). Each artifact written here can be
// read back by a function in this header or in market_data.hpp.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mrp/backtest.hpp"
#include "mrp/common.hpp"
#include "mrp/market_data.hpp"
#include "mrp/moments.hpp"
#include "mrp/sca_solver.hpp"

namespace mrp {

using nlohmann::json;

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<double> to_std(const VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

inline VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

// Writes content to path via a temp file and rename, so readers never see a
// partial artifact.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
    if (!out) throw IoError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

// --- solve report -----------------------------------------------------------

inline json solve_report_to_json(const SolveReport& report) {
  json j;
  j["weights"]["w"] = detail::to_std(report.weights.w);
  j["weights"]["w_p"] = detail::to_std(report.weights.w_p);
  j["objective"] = {{"u", report.objective.u},
                    {"v", report.objective.v},
                    {"f", report.objective.f},
                    {"mu", report.objective.mu}};
  j["objective_trace"] = report.objective_trace;
  j["gamma_trace"] = report.gamma_trace;
  j["feasibility_trace"] = report.feasibility_trace;
  j["inner_iters"] = report.inner_iters;
  j["outer_iters"] = report.outer_iters;
  j["converged"] = report.converged;
  j["reason"] = report.reason;
  j["feasibility_gap"] = report.feasibility_gap;
  j["warnings"] = report.warnings;
  return j;
}

inline SolveReport solve_report_from_json(const json& j) {
  SolveReport report;
  report.weights.w = detail::to_eigen(j.at("weights").at("w").get<std::vector<double>>());
  report.weights.w_p = detail::to_eigen(j.at("weights").at("w_p").get<std::vector<double>>());
  report.objective.u = j.at("objective").at("u").get<double>();
  report.objective.v = j.at("objective").at("v").get<double>();
  report.objective.f = j.at("objective").at("f").get<double>();
  report.objective.mu = j.at("objective").at("mu").get<double>();
  report.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  report.gamma_trace = j.at("gamma_trace").get<std::vector<double>>();
  report.feasibility_trace = j.at("feasibility_trace").get<std::vector<double>>();
  report.inner_iters = j.at("inner_iters").get<std::vector<int>>();
  report.outer_iters = j.at("outer_iters").get<int>();
  report.converged = j.at("converged").get<bool>();
  report.reason = j.at("reason").get<std::string>();
  report.feasibility_gap = j.at("feasibility_gap").get<double>();
  report.warnings = j.at("warnings").get<std::vector<std::string>>();
  return report;
}

// --- backtest report --------------------------------------------------------

inline json backtest_report_to_json(const BacktestReport& report) {
  json trades = json::array();
  for (const auto& trade : report.trades) {
    trades.push_back({{"entry_index", trade.entry_index},
                      {"exit_index", trade.exit_index},
                      {"side", trade.side == TradeSide::long_spread ? "long" : "short"},
                      {"entry_value", trade.entry_value},
                      {"exit_value", trade.exit_value},
                      {"pnl", trade.pnl}});
  }
  json j;
  j["trades"] = std::move(trades);
  j["cumulative_pnl"] = report.cumulative_pnl;
  j["positions"] = report.positions;
  j["open_mark"] = report.open_mark;
  j["roi"] = report.roi;
  j["sharpe"] = report.sharpe.value;
  j["sharpe_degenerate"] = report.sharpe.degenerate;
  j["num_trades"] = report.num_trades;
  j["skipped_periods"] = report.skipped_periods;
  return j;
}

inline BacktestReport backtest_report_from_json(const json& j) {
  BacktestReport report;
  for (const auto& item : j.at("trades")) {
    Trade trade;
    trade.entry_index = item.at("entry_index").get<Eigen::Index>();
    trade.exit_index = item.at("exit_index").get<Eigen::Index>();
    trade.side = item.at("side").get<std::string>() == "long" ? TradeSide::long_spread
                                                              : TradeSide::short_spread;
    trade.entry_value = item.at("entry_value").get<double>();
    trade.exit_value = item.at("exit_value").get<double>();
    trade.pnl = item.at("pnl").get<double>();
    report.trades.push_back(trade);
  }
  report.cumulative_pnl = j.at("cumulative_pnl").get<std::vector<double>>();
  report.positions = j.at("positions").get<std::vector<int>>();
  report.open_mark = j.at("open_mark").get<double>();
  report.roi = j.at("roi").get<double>();
  report.sharpe.value = j.at("sharpe").get<double>();
  report.sharpe.degenerate = j.at("sharpe_degenerate").get<bool>();
  report.num_trades = j.at("num_trades").get<int>();
  report.skipped_periods = j.at("skipped_periods").get<int>();
  return report;
}

// --- moments dump -----------------------------------------------------------

inline json moments_to_json(const LaggedMoments& moments) {
  json matrices = json::array();
  for (const auto& mat : moments.m) {
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(mat.size()));
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      for (Eigen::Index j = 0; j < mat.cols(); ++j) row_major.push_back(mat(i, j));
    matrices.push_back(row_major);
  }
  return {{"lag_order", moments.lag_order},
          {"dim", moments.dim()},
          {"matrices", matrices},
          {"warnings", moments.warnings}};
}

inline LaggedMoments moments_from_json(const json& j) {
  LaggedMoments moments;
  moments.lag_order = j.at("lag_order").get<int>();
  const auto dim = j.at("dim").get<Eigen::Index>();
  for (const auto& flat : j.at("matrices")) {
    const auto values = flat.get<std::vector<double>>();
    if (values.size() != static_cast<std::size_t>(dim * dim))
      throw ValidationError("moments dump matrix size mismatch");
    MatrixXd mat(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index k = 0; k < dim; ++k)
        mat(i, k) = values[static_cast<std::size_t>(i * dim + k)];
    moments.m.push_back(std::move(mat));
  }
  moments.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (moments.m.size() != static_cast<std::size_t>(moments.lag_order) + 1)
    throw ValidationError("moments dump lag count mismatch");
  return moments;
}

// --- CSV artifacts ----------------------------------------------------------

inline std::string prices_csv(const std::vector<std::string>& dates,
                              const std::vector<std::string>& tickers, const MatrixXd& prices) {
  std::string out = "date";
  for (const auto& ticker : tickers) out += "," + ticker;
  out += "\n";
  for (Eigen::Index t = 0; t < prices.rows(); ++t) {
    out += dates[static_cast<std::size_t>(t)];
    for (Eigen::Index j = 0; j < prices.cols(); ++j)
      out += "," + detail::format_double(prices(t, j));
    out += "\n";
  }
  return out;
}

inline std::string basis_csv(const MatrixXd& basis) {
  std::string out;
  for (Eigen::Index i = 0; i < basis.rows(); ++i) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      if (j > 0) out += ",";
      out += detail::format_double(basis(i, j));
    }
    out += "\n";
  }
  return out;
}

inline std::string weights_csv(const std::vector<std::string>& tickers, const VectorXd& w_p) {
  std::string out = "ticker,weight\n";
  for (Eigen::Index i = 0; i < w_p.size(); ++i)
    out += tickers[static_cast<std::size_t>(i)] + "," + detail::format_double(w_p[i]) + "\n";
  return out;
}

inline std::vector<std::pair<std::string, double>> read_weights_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "ticker,weight")
    throw IoError(path + ": bad weights header");
  std::vector<std::pair<std::string, double>> rows;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 2) throw IoError(path + ": bad weights row");
    rows.emplace_back(cells[0], std::stod(cells[1]));
  }
  return rows;
}

inline std::string trace_csv(const std::vector<double>& trace) {
  std::string out = "iteration,objective\n";
  for (std::size_t k = 0; k < trace.size(); ++k)
    out += std::to_string(k) + "," + detail::format_double(trace[k]) + "\n";
  return out;
}

inline std::vector<double> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "iteration,objective")
    throw IoError(path + ": bad trace header");
  std::vector<double> trace;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 2) throw IoError(path + ": bad trace row");
    trace.push_back(std::stod(cells[1]));
  }
  return trace;
}

inline std::string cumulative_pnl_csv(const std::vector<std::string>& dates,
                                      const std::vector<double>& pnl) {
  std::string out = "date,cumulative_pnl\n";
  for (std::size_t t = 0; t < pnl.size(); ++t)
    out += dates[t] + "," + detail::format_double(pnl[t]) + "\n";
  return out;
}

inline std::vector<std::pair<std::string, double>> read_cumulative_pnl_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "date,cumulative_pnl")
    throw IoError(path + ": bad cumulative pnl header");
  std::vector<std::pair<std::string, double>> rows;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 2) throw IoError(path + ": bad cumulative pnl row");
    rows.emplace_back(cells[0], std::stod(cells[1]));
  }
  return rows;
}

}  // namespace mrp
