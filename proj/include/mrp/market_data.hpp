// market_data.hpp
// Price-panel ingestion and spread construction.
//
// An AssetPanel holds aligned natural-log prices for M assets over T dates.
// A SpreadBasis maps the M assets onto N spreads (columns are cointegration
// vectors) and carries the gross-leverage budget for the portfolio built on
// top of those spreads.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mrp/common.hpp"

namespace mrp {

struct AssetPanel {
  std::vector<std::string> dates;    // strictly increasing, ISO-8601
  std::vector<std::string> tickers;  // M identifiers
  MatrixXd log_prices;               // T x M, y_t = log p_t

  Eigen::Index periods() const { return log_prices.rows(); }
  Eigen::Index assets() const { return log_prices.cols(); }
};

struct SpreadBasis {
  MatrixXd basis;          // M x N, columns are cointegration vectors
  double leverage_budget;  // gross dollar exposure cap, > 0

  Eigen::Index assets() const { return basis.rows(); }
  Eigen::Index spreads() const { return basis.cols(); }
};

struct SpreadSeries {
  MatrixXd values;  // T x N

  Eigen::Index periods() const { return values.rows(); }
  Eigen::Index spreads() const { return values.cols(); }
};

// Checks the panel invariants; throws ValidationError on violation.
inline void validate_panel(const AssetPanel& panel) {
  const auto t = panel.periods();
  const auto m = panel.assets();
  if (t < 2) throw ValidationError("panel needs at least 2 rows, got " + std::to_string(t));
  if (m < 1) throw ValidationError("panel needs at least 1 asset");
  if (panel.dates.size() != static_cast<std::size_t>(t))
    throw ValidationError("date count does not match price rows");
  if (panel.tickers.size() != static_cast<std::size_t>(m))
    throw ValidationError("ticker count does not match price columns");
  for (std::size_t i = 1; i < panel.dates.size(); ++i) {
    if (panel.dates[i] <= panel.dates[i - 1])
      throw ValidationError("dates not strictly increasing at row " + std::to_string(i) +
                            " (" + panel.dates[i] + ")");
  }
  if (!is_finite(panel.log_prices)) throw ValidationError("non-finite log-price entry");
}

inline AssetPanel make_panel(std::vector<std::string> dates, std::vector<std::string> tickers,
                             MatrixXd log_prices) {
  AssetPanel panel{std::move(dates), std::move(tickers), std::move(log_prices)};
  validate_panel(panel);
  return panel;
}

inline void validate_basis(const SpreadBasis& sb) {
  if (sb.basis.cols() < 1) throw ValidationError("basis needs at least one column");
  if (sb.basis.cols() > sb.basis.rows())
    throw ValidationError("basis has more spreads than assets (" +
                          std::to_string(sb.basis.cols()) + " > " +
                          std::to_string(sb.basis.rows()) + ")");
  if (!is_finite(sb.basis)) throw ValidationError("non-finite basis entry");
  for (Eigen::Index j = 0; j < sb.basis.cols(); ++j) {
    if (sb.basis.col(j).cwiseAbs().maxCoeff() == 0.0)
      throw ValidationError("basis column " + std::to_string(j) + " is all zero");
  }
  if (!(sb.leverage_budget > 0.0)) throw ValidationError("leverage budget must be positive");
}

inline SpreadBasis make_basis(MatrixXd basis, double leverage_budget) {
  SpreadBasis sb{std::move(basis), leverage_budget};
  validate_basis(sb);
  return sb;
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline bool is_missing_cell(const std::string& cell) {
  if (cell.empty()) return true;
  std::string lower;
  lower.reserve(cell.size());
  for (char c : cell) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "na" || lower == "nan" || lower == "null";
}

}  // namespace detail

// Loads a price CSV (header `date,<ticker>,...`; ISO-8601 dates) into a
// log-price panel. Rows are sorted by date; rows with any missing price are
// dropped. A non-positive price is rejected outright, naming the offender.
inline AssetPanel load_panel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prices file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw IoError("empty prices file: " + path);
  auto header = detail::split_csv_line(line);
  if (header.size() < 2) throw IoError("prices header needs a date column and at least one ticker: " + path);
  std::vector<std::string> tickers(header.begin() + 1, header.end());
  const std::size_t m = tickers.size();

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != m + 1)
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(m + 1) +
                    " cells, got " + std::to_string(cells.size()));
    bool missing = false;
    std::vector<double> prices(m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto& cell = cells[j + 1];
      if (detail::is_missing_cell(cell)) {
        missing = true;
        break;
      }
      std::size_t consumed = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &consumed);
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" + cell + "' for " +
                      tickers[j]);
      }
      if (consumed != cell.size())
        throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" + cell + "' for " +
                      tickers[j]);
      if (!(value > 0.0))
        throw ValidationError(path + ":" + std::to_string(line_no) + ": non-positive price " +
                              cell + " for " + tickers[j]);
      prices[j] = value;
    }
    if (missing) continue;
    rows.emplace_back(cells[0], std::move(prices));
  }

  if (rows.size() < 2)
    throw ValidationError(path + ": fewer than 2 usable rows after dropping incomplete ones");

  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first)
      throw ValidationError(path + ": duplicate date " + rows[i].first);
  }

  MatrixXd log_prices(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
  std::vector<std::string> dates;
  dates.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    dates.push_back(rows[i].first);
    for (std::size_t j = 0; j < m; ++j)
      log_prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::log(rows[i].second[j]);
  }
  return make_panel(std::move(dates), std::move(tickers), std::move(log_prices));
}

// Loads a basis CSV: M rows by N columns of weights, no header.
inline MatrixXd load_basis_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open basis file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty basis file");
  MatrixXd basis(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < basis.rows(); ++i)
    for (Eigen::Index j = 0; j < basis.cols(); ++j)
      basis(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return basis;
}

// s_t = Bᵀ y_t for every row of the panel; with the identity basis the
// spreads are the log-prices themselves.
inline SpreadSeries build_spreads(const AssetPanel& panel, const SpreadBasis& basis) {
  if (basis.assets() != panel.assets())
    throw ValidationError("basis rows (" + std::to_string(basis.assets()) +
                          ") do not match panel assets (" + std::to_string(panel.assets()) + ")");
  SpreadSeries series;
  series.values = panel.log_prices * basis.basis;
  return series;
}

}  // namespace mrp
